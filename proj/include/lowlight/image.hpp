#pragma once

#include <cstddef>
#include <memory>
#include <span>
#include <utility>
#include <vector>

namespace lowlight {

/// Allocator that leaves trivially constructible elements uninitialized when
/// a container grows without an explicit value.
template <class T>
struct DefaultInitAllocator : std::allocator<T> {
    template <class U>
    struct rebind {
        using other = DefaultInitAllocator<U>;
    };
    using std::allocator<T>::allocator;
    template <class U>
    void construct(U* p) noexcept {
        ::new (static_cast<void*>(p)) U;
    }
    template <class U, class... Args>
    void construct(U* p, Args&&... args) {
        std::construct_at(p, std::forward<Args>(args)...);
    }
};

struct Shape {
    int height = 0;
    int width = 0;
    int channels = 0;

    std::size_t size() const noexcept {
        return static_cast<std::size_t>(height) * static_cast<std::size_t>(width) *
               static_cast<std::size_t>(channels);
    }
    std::size_t pixels() const noexcept {
        return static_cast<std::size_t>(height) * static_cast<std::size_t>(width);
    }
    friend bool operator==(const Shape&, const Shape&) = default;
};

/// H x W x C array of doubles stored row-major with interleaved channels,
/// i.e. element (y, x, c) lives at (y * W + x) * C + c.
class ImageTensor {
public:
    ImageTensor() = default;
    ImageTensor(int height, int width, int channels, double fill = 0.0);
    ImageTensor(int height, int width, int channels, std::vector<double> data);
    explicit ImageTensor(Shape shape, double fill = 0.0)
        : ImageTensor(shape.height, shape.width, shape.channels, fill) {}

    /// Tensor whose elements are left unspecified; the caller writes every one.
    static ImageTensor uninitialized(Shape shape);

    /// 1x1x1 tensor, the shape of every loss value.
    static ImageTensor scalar(double value) { return ImageTensor(1, 1, 1, value); }

    int height() const noexcept { return shape_.height; }
    int width() const noexcept { return shape_.width; }
    int channels() const noexcept { return shape_.channels; }
    const Shape& shape() const noexcept { return shape_; }
    std::size_t size() const noexcept { return data_.size(); }
    bool empty() const noexcept { return data_.empty(); }
    bool is_scalar() const noexcept { return data_.size() == 1; }

    std::size_t index(int y, int x, int c = 0) const noexcept {
        return (static_cast<std::size_t>(y) * static_cast<std::size_t>(shape_.width) +
                static_cast<std::size_t>(x)) * static_cast<std::size_t>(shape_.channels) +
               static_cast<std::size_t>(c);
    }
    double& at(int y, int x, int c = 0) noexcept { return data_[index(y, x, c)]; }
    double at(int y, int x, int c = 0) const noexcept { return data_[index(y, x, c)]; }

    double& operator[](std::size_t i) noexcept { return data_[i]; }
    double operator[](std::size_t i) const noexcept { return data_[i]; }

    std::span<double> data() & noexcept { return data_; }
    std::span<const double> data() const& noexcept { return data_; }
    // A view into a temporary would dangle.
    std::span<const double> data() const&& = delete;

    /// Value of a 1x1x1 tensor.
    double item() const;

    bool all_finite() const noexcept;

    friend bool operator==(const ImageTensor&, const ImageTensor&) = default;

private:
    Shape shape_{};
    std::vector<double, DefaultInitAllocator<double>> data_;
};

}  // namespace lowlight
