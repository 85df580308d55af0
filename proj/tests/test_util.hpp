#pragma once

// Shared helpers for the unit suites.

#include <cmath>
#include <cstddef>
#include <vector>

#include "relsim/random.hpp"

namespace relsim::test {

// Replays a fixed sequence of uniforms (cycling).
class FixedStream final : public UniformStream {
public:
    explicit FixedStream(std::vector<double> values) : values_(std::move(values)) {}
    double next() override {
        const double v = values_[pos_ % values_.size()];
        ++pos_;
        return v;
    }

private:
    std::vector<double> values_;
    std::size_t pos_ = 0;
};

// Forwards to an inner stream while recording every draw.
class RecordingStream final : public UniformStream {
public:
    explicit RecordingStream(UniformStream& inner) : inner_(inner) {}
    double next() override {
        const double v = inner_.next();
        drawn.push_back(v);
        return v;
    }
    std::vector<double> drawn;

private:
    UniformStream& inner_;
};

inline double mean_of(const std::vector<double>& v) {
    double s = 0.0;
    for (double x : v) s += x;
    return s / static_cast<double>(v.size());
}

inline double var_of(const std::vector<double>& v) {
    const double m = mean_of(v);
    double s = 0.0;
    for (double x : v) s += (x - m) * (x - m);
    return s / static_cast<double>(v.size());
}

inline bool close_rel(double a, double b, double tol) {
    return std::abs(a - b) <= tol * std::max({std::abs(a), std::abs(b), 1e-300});
}

} // namespace relsim::test
