#include "lowlight/image.hpp"

#include <cmath>
#include <string>

#include "lowlight/errors.hpp"

namespace lowlight {

namespace {

void check_dims(int height, int width, int channels) {
    if (height <= 0 || width <= 0 || channels <= 0) {
        throw InvalidInput("image dimensions must be positive, got " + std::to_string(height) +
                           "x" + std::to_string(width) + "x" + std::to_string(channels));
    }
}

}  // namespace

ImageTensor::ImageTensor(int height, int width, int channels, double fill)
    : shape_{height, width, channels} {
    check_dims(height, width, channels);
    data_.assign(shape_.size(), fill);
}

ImageTensor ImageTensor::uninitialized(Shape shape) {
    check_dims(shape.height, shape.width, shape.channels);
    ImageTensor out;
    out.shape_ = shape;
    out.data_.resize(shape.size());
    return out;
}

ImageTensor::ImageTensor(int height, int width, int channels, std::vector<double> data)
    : shape_{height, width, channels}, data_(data.begin(), data.end()) {
    check_dims(height, width, channels);
    if (data_.size() != shape_.size()) {
        throw InvalidInput("image data length " + std::to_string(data_.size()) +
                           " does not match " + std::to_string(shape_.size()));
    }
}

double ImageTensor::item() const {
    if (data_.size() != 1) throw InvalidInput("item() on a non-scalar tensor");
    return data_[0];
}

bool ImageTensor::all_finite() const noexcept {
    for (double v : data_) {
        if (!std::isfinite(v)) return false;
    }
    return true;
}

}  // namespace lowlight
