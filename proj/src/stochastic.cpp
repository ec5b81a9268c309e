#include "confcycle/stochastic.hpp"

#include <cmath>

namespace confcycle {

double RandomStream::normal() noexcept {
    if (spare_) {
        const double v = *spare_;
        spare_.reset();
        return v;
    }
    double x = 0.0, y = 0.0, s = 0.0;
    do {
        x = 2.0 * uniform() - 1.0;
        y = 2.0 * uniform() - 1.0;
        s = x * x + y * y;
    } while (s >= 1.0 || s == 0.0);
    const double f = std::sqrt(-2.0 * std::log(s) / s);
    spare_ = y * f;
    return x * f;
}

ProductivityState initial_productivity(const ModelParams& p) { return {0.0, p.z0}; }

ProductivityState step_productivity(const ProductivityState& prev, const ModelParams& p, double std_normal) {
    ProductivityState next;
    next.frak_z = p.eta * prev.frak_z + std::sqrt(1.0 - p.eta * p.eta) * p.sigma_z * std_normal;
    next.z = p.z0 * std::exp(next.frak_z);
    return next;
}

ProductivityState step_productivity(const ProductivityState& prev, const ModelParams& p, RandomStream& stream) {
    return step_productivity(prev, p, stream.normal());
}

double risk_from_uniform(double u, double a) {
    if (std::isinf(a)) return 1.0;
    return std::pow(u, 1.0 / a);
}

double draw_risk(const ModelParams& p, RandomStream& stream) {
    return risk_from_uniform(stream.uniform_open_zero(), p.a);
}

} // namespace confcycle
