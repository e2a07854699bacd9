#pragma once

#include <cassert>
#include <cstdint>
#include <vector>

namespace synet {

// Dense row-major H x W container.
template <typename T>
class Grid {
 public:
    Grid() = default;
    Grid(int height, int width, T fill = T{})
        : h_(height), w_(width), v_(static_cast<size_t>(height) * static_cast<size_t>(width), fill) {}

    int height() const { return h_; }
    int width() const { return w_; }
    size_t size() const { return v_.size(); }
    bool empty() const { return v_.empty(); }

    T& at(int r, int c) {
        assert(r >= 0 && r < h_ && c >= 0 && c < w_);
        return v_[static_cast<size_t>(r) * static_cast<size_t>(w_) + static_cast<size_t>(c)];
    }
    const T& at(int r, int c) const {
        assert(r >= 0 && r < h_ && c >= 0 && c < w_);
        return v_[static_cast<size_t>(r) * static_cast<size_t>(w_) + static_cast<size_t>(c)];
    }

    T& operator[](size_t i) { return v_[i]; }
    const T& operator[](size_t i) const { return v_[i]; }

    T* data() { return v_.data(); }
    const T* data() const { return v_.data(); }

    bool operator==(const Grid&) const = default;

 private:
    int h_ = 0;
    int w_ = 0;
    std::vector<T> v_;
};

// Row-major dense matrix of doubles; the workhorse for feature/center sets.
struct Mat {
    int rows = 0;
    int cols = 0;
    std::vector<double> a;

    Mat() = default;
    Mat(int r, int c, double fill = 0.0)
        : rows(r), cols(c), a(static_cast<size_t>(r) * static_cast<size_t>(c), fill) {}

    double* row(int r) { return a.data() + static_cast<size_t>(r) * static_cast<size_t>(cols); }
    const double* row(int r) const {
        return a.data() + static_cast<size_t>(r) * static_cast<size_t>(cols);
    }
    double& at(int r, int c) { return a[static_cast<size_t>(r) * static_cast<size_t>(cols) + static_cast<size_t>(c)]; }
    double at(int r, int c) const {
        return a[static_cast<size_t>(r) * static_cast<size_t>(cols) + static_cast<size_t>(c)];
    }
};

inline double dot(const double* x, const double* y, int n) {
    double s = 0.0;
    for (int i = 0; i < n; ++i) s += x[i] * y[i];
    return s;
}

inline double norm2(const double* x, int n) {
    double s = 0.0;
    for (int i = 0; i < n; ++i) s += x[i] * x[i];
    return s;
}

}  // namespace synet
