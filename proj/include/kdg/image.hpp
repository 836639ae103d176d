#pragma once

#include <complex>
#include <cstddef>
#include <span>
#include <vector>

#include "kdg/error.hpp"

namespace kdg {

using cplx = std::complex<double>;

enum class DomainTag { Image, KSpace };

// Row-major complex 2D array in image or k-space domain.
class ComplexImage {
public:
    ComplexImage() = default;
    ComplexImage(int height, int width, DomainTag tag = DomainTag::Image);
    ComplexImage(int height, int width, std::vector<cplx> data, DomainTag tag = DomainTag::Image);

    int height() const noexcept { return height_; }
    int width() const noexcept { return width_; }
    std::size_t size() const noexcept { return data_.size(); }
    DomainTag tag() const noexcept { return tag_; }
    void set_tag(DomainTag t) noexcept { tag_ = t; }

    cplx& operator()(int row, int col) { return data_[static_cast<std::size_t>(row) * width_ + col]; }
    const cplx& operator()(int row, int col) const { return data_[static_cast<std::size_t>(row) * width_ + col]; }

    std::span<cplx> row(int r) { return {data_.data() + static_cast<std::size_t>(r) * width_, static_cast<std::size_t>(width_)}; }
    std::span<const cplx> row(int r) const {
        return {data_.data() + static_cast<std::size_t>(r) * width_, static_cast<std::size_t>(width_)};
    }

    std::span<cplx> data() noexcept { return data_; }
    std::span<const cplx> data() const noexcept { return data_; }
    std::vector<cplx>& storage() noexcept { return data_; }

private:
    int height_ = 0;
    int width_ = 0;
    DomainTag tag_ = DomainTag::Image;
    std::vector<cplx> data_;
};

// Row-major real 2D image.
class Image {
public:
    Image() = default;
    Image(int height, int width, double fill = 0.0);
    Image(int height, int width, std::vector<double> data);

    int height() const noexcept { return height_; }
    int width() const noexcept { return width_; }
    std::size_t size() const noexcept { return data_.size(); }

    double& operator()(int row, int col) { return data_[static_cast<std::size_t>(row) * width_ + col]; }
    double operator()(int row, int col) const { return data_[static_cast<std::size_t>(row) * width_ + col]; }

    std::span<double> data() noexcept { return data_; }
    std::span<const double> data() const noexcept { return data_; }
    std::vector<double>& storage() noexcept { return data_; }

    bool operator==(const Image&) const = default;

private:
    int height_ = 0;
    int width_ = 0;
    std::vector<double> data_;
};

ComplexImage to_complex(const Image& img);
Image magnitude(const ComplexImage& img);

void require_same_shape(const Image& a, const Image& b, const char* what);
void require_same_shape(const ComplexImage& a, const ComplexImage& b, const char* what);

}  // namespace kdg
