#include "relsim/estimate.hpp"

#include "relsim/normal.hpp"

namespace relsim {

std::optional<double> reliability_index(double p_f) {
    if (p_f > 0.0 && p_f < 1.0) return -std_normal_quantile(p_f);
    return std::nullopt;
}

} // namespace relsim
