#include "kdg/image.hpp"

#include <cmath>
#include <string>

namespace kdg {

namespace {
void check_dims(int h, int w) {
    if (h <= 0 || w <= 0) throw ShapeError("image dimensions must be positive");
}
}  // namespace

ComplexImage::ComplexImage(int height, int width, DomainTag tag)
    : height_(height), width_(width), tag_(tag) {
    check_dims(height, width);
    data_.assign(static_cast<std::size_t>(height) * width, cplx{});
}

ComplexImage::ComplexImage(int height, int width, std::vector<cplx> data, DomainTag tag)
    : height_(height), width_(width), tag_(tag), data_(std::move(data)) {
    check_dims(height, width);
    if (data_.size() != static_cast<std::size_t>(height) * width)
        throw ShapeError("complex image data length does not match height*width");
}

Image::Image(int height, int width, double fill) : height_(height), width_(width) {
    check_dims(height, width);
    data_.assign(static_cast<std::size_t>(height) * width, fill);
}

Image::Image(int height, int width, std::vector<double> data)
    : height_(height), width_(width), data_(std::move(data)) {
    check_dims(height, width);
    if (data_.size() != static_cast<std::size_t>(height) * width)
        throw ShapeError("image data length does not match height*width");
}

ComplexImage to_complex(const Image& img) {
    ComplexImage out(img.height(), img.width(), DomainTag::Image);
    auto src = img.data();
    auto dst = out.data();
    for (std::size_t i = 0; i < src.size(); ++i) dst[i] = src[i];
    return out;
}

Image magnitude(const ComplexImage& img) {
    Image out(img.height(), img.width());
    auto src = img.data();
    auto dst = out.data();
    for (std::size_t i = 0; i < src.size(); ++i) dst[i] = std::abs(src[i]);
    return out;
}

void require_same_shape(const Image& a, const Image& b, const char* what) {
    if (a.height() != b.height() || a.width() != b.width())
        throw ShapeError(std::string(what) + ": shape mismatch");
}

void require_same_shape(const ComplexImage& a, const ComplexImage& b, const char* what) {
    if (a.height() != b.height() || a.width() != b.width())
        throw ShapeError(std::string(what) + ": shape mismatch");
}

}  // namespace kdg
