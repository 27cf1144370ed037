#include "lowlight/config_file.hpp"

#include <charconv>
#include <fstream>
#include <functional>
#include <limits>
#include <sstream>
#include <vector>

#include "lowlight/errors.hpp"

namespace lowlight {

namespace {

std::string trim(const std::string& s) {
    const auto begin = s.find_first_not_of(" \t\r");
    if (begin == std::string::npos) return {};
    const auto end = s.find_last_not_of(" \t\r");
    return s.substr(begin, end - begin + 1);
}

double parse_double(const std::string& key, const std::string& text) {
    if (text == "inf" || text == "infinity") return std::numeric_limits<double>::infinity();
    double v = 0.0;
    const auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), v);
    if (ec != std::errc() || ptr != text.data() + text.size()) {
        throw InvalidInput("config: '" + key + "' expects a number, got '" + text + "'");
    }
    return v;
}

int parse_int(const std::string& key, const std::string& text) {
    int v = 0;
    const auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), v);
    if (ec != std::errc() || ptr != text.data() + text.size()) {
        throw InvalidInput("config: '" + key + "' expects an integer, got '" + text + "'");
    }
    return v;
}

bool parse_bool(const std::string& key, const std::string& text) {
    if (text == "1" || text == "true" || text == "yes" || text == "on") return true;
    if (text == "0" || text == "false" || text == "no" || text == "off") return false;
    throw InvalidInput("config: '" + key + "' expects a boolean, got '" + text + "'");
}

std::string format_double(double v) {
    std::ostringstream os;
    os.precision(17);
    os << v;
    return os.str();
}

const char* stage_name(FirstStage s) {
    switch (s) {
        case FirstStage::MeRetinex: return "me-retinex";
        case FirstStage::ExternalHe: return "he";
        case FirstStage::ExternalAhe: return "ahe";
        case FirstStage::ExternalFile: return "file";
    }
    return "me-retinex";
}

FirstStage parse_stage(const std::string& text) {
    if (text == "me-retinex") return FirstStage::MeRetinex;
    if (text == "he") return FirstStage::ExternalHe;
    if (text == "ahe") return FirstStage::ExternalAhe;
    if (text == "file") return FirstStage::ExternalFile;
    throw InvalidInput("config: first_stage must be one of me-retinex, he, ahe, file; got '" + text + "'");
}

struct Entry {
    std::string key;
    std::function<void(PipelineConfig&, const std::string&)> set;
    std::function<std::string(const PipelineConfig&)> get;
};

template <class Member>
Entry real_entry(std::string key, Member member) {
    return {key,
            [key, member](PipelineConfig& c, const std::string& v) { member(c) = parse_double(key, v); },
            [member](const PipelineConfig& c) {
                PipelineConfig copy = c;
                return format_double(member(copy));
            }};
}

template <class Member>
Entry int_entry(std::string key, Member member) {
    return {key,
            [key, member](PipelineConfig& c, const std::string& v) { member(c) = parse_int(key, v); },
            [member](const PipelineConfig& c) {
                PipelineConfig copy = c;
                return std::to_string(member(copy));
            }};
}

template <class Member>
Entry bool_entry(std::string key, Member member) {
    return {key,
            [key, member](PipelineConfig& c, const std::string& v) { member(c) = parse_bool(key, v); },
            [member](const PipelineConfig& c) {
                PipelineConfig copy = c;
                return std::string(member(copy) ? "true" : "false");
            }};
}

void add_run_entries(std::vector<Entry>& e, const std::string& prefix,
                     RunParams& (*run)(PipelineConfig&)) {
    e.push_back(real_entry(prefix + ".lr", [run](PipelineConfig& c) -> double& { return run(c).learning_rate; }));
    e.push_back(real_entry(prefix + ".beta1", [run](PipelineConfig& c) -> double& { return run(c).beta1; }));
    e.push_back(real_entry(prefix + ".beta2", [run](PipelineConfig& c) -> double& { return run(c).beta2; }));
    e.push_back(real_entry(prefix + ".adam_eps", [run](PipelineConfig& c) -> double& { return run(c).eps; }));
    e.push_back(int_entry(prefix + ".max_steps", [run](PipelineConfig& c) -> int& { return run(c).max_steps; }));
    e.push_back(real_entry(prefix + ".tol", [run](PipelineConfig& c) -> double& { return run(c).tol; }));
    e.push_back(int_entry(prefix + ".patience", [run](PipelineConfig& c) -> int& { return run(c).patience; }));
}

const std::vector<Entry>& entries() {
    static const std::vector<Entry> table = [] {
        std::vector<Entry> e;
        e.push_back(real_entry("ice.lambda1", [](PipelineConfig& c) -> double& { return c.ice.lambda1; }));
        e.push_back(real_entry("ice.lambda2", [](PipelineConfig& c) -> double& { return c.ice.lambda2; }));
        e.push_back(real_entry("ice.lambda", [](PipelineConfig& c) -> double& { return c.ice.lambda; }));
        e.push_back(real_entry("ice.lambda3", [](PipelineConfig& c) -> double& { return c.ice.lambda3; }));
        e.push_back(int_entry("ice.he_bins", [](PipelineConfig& c) -> int& { return c.ice.he_bins; }));
        add_run_entries(e, "ice", [](PipelineConfig& c) -> RunParams& { return c.ice_run; });

        e.push_back(real_entry("red.lambda1", [](PipelineConfig& c) -> double& { return c.red.lambda1; }));
        e.push_back(real_entry("red.lambda2", [](PipelineConfig& c) -> double& { return c.red.lambda2; }));
        e.push_back(real_entry("red.lambda", [](PipelineConfig& c) -> double& { return c.red.lambda; }));
        e.push_back(real_entry("red.lambda3", [](PipelineConfig& c) -> double& { return c.red.lambda3; }));
        e.push_back(int_entry("red.mean_k", [](PipelineConfig& c) -> int& { return c.red.mean_k; }));
        e.push_back(int_entry("red.norm_k", [](PipelineConfig& c) -> int& { return c.red.norm_k; }));
        add_run_entries(e, "red", [](PipelineConfig& c) -> RunParams& { return c.red_run; });
        e.push_back(bool_entry("red.warm_start", [](PipelineConfig& c) -> bool& { return c.red_warm_start; }));
        e.push_back(int_entry("red.weight_stride", [](PipelineConfig& c) -> int& { return c.weight_refresh_stride; }));

        e.push_back({"first_stage",
                     [](PipelineConfig& c, const std::string& v) { c.first_stage = parse_stage(v); },
                     [](const PipelineConfig& c) { return std::string(stage_name(c.first_stage)); }});
        e.push_back(int_entry("ahe.tiles", [](PipelineConfig& c) -> int& { return c.ahe_tiles; }));
        e.push_back(real_entry("ahe.clip", [](PipelineConfig& c) -> double& { return c.ahe_clip; }));

        e.push_back(bool_entry("ablation.drop_w", [](PipelineConfig& c) -> bool& { return c.ablations.drop_w; }));
        e.push_back(bool_entry("ablation.drop_wi_wr", [](PipelineConfig& c) -> bool& { return c.ablations.drop_wi_wr; }));
        e.push_back(bool_entry("ablation.drop_exp_wi_term", [](PipelineConfig& c) -> bool& { return c.ablations.drop_exp_wi_term; }));
        e.push_back(bool_entry("ablation.drop_exp_wr_term", [](PipelineConfig& c) -> bool& { return c.ablations.drop_exp_wr_term; }));
        return e;
    }();
    return table;
}

}  // namespace

KeyValues parse_key_values(const std::string& text) {
    KeyValues out;
    std::istringstream in(text);
    std::string line;
    int number = 0;
    while (std::getline(in, line)) {
        ++number;
        if (const auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
        line = trim(line);
        if (line.empty()) continue;
        const auto eq = line.find('=');
        if (eq == std::string::npos) {
            throw InvalidInput("config line " + std::to_string(number) + ": expected key = value");
        }
        const std::string key = trim(line.substr(0, eq));
        if (key.empty()) throw InvalidInput("config line " + std::to_string(number) + ": empty key");
        out[key] = trim(line.substr(eq + 1));
    }
    return out;
}

KeyValues read_key_values(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw InvalidInput("cannot read config file '" + path.string() + "'");
    std::ostringstream text;
    text << in.rdbuf();
    return parse_key_values(text.str());
}

void apply_setting(PipelineConfig& config, const std::string& key, const std::string& value) {
    for (const auto& e : entries()) {
        if (e.key == key) {
            e.set(config, value);
            return;
        }
    }
    throw InvalidInput("config: unknown key '" + key + "'");
}

void apply_settings(PipelineConfig& config, const KeyValues& values) {
    for (const auto& [k, v] : values) apply_setting(config, k, v);
}

std::string dump_settings(const PipelineConfig& config) {
    std::ostringstream os;
    for (const auto& e : entries()) os << e.key << " = " << e.get(config) << '\n';
    return os.str();
}

}  // namespace lowlight
