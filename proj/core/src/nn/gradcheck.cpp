#include "discrimq/nn/gradcheck.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <vector>

#include "discrimq/errors.hpp"
#include "discrimq/rng.hpp"

namespace discrimq::nn {

namespace {

double checked(double v) {
    if (!std::isfinite(v)) {
        throw NumericError("finite_diff_check: loss is not finite");
    }
    return v;
}

}  // namespace

GradCheckResult finite_diff_check(LossFunction const& loss, ParamStore<double>& store,
                                  GradCheckOptions const& options) {
    store.zero_grad();
    checked(loss(store, true));

    std::vector<std::vector<double>> analytic;
    analytic.reserve(store.size());
    for (auto const& e : store.entries()) {
        analytic.emplace_back(e.grad.data().begin(), e.grad.data().end());
    }

    Rng rng(options.seed);
    GradCheckResult result;
    for (std::size_t p = 0; p < store.size(); ++p) {
        auto& entry = store.entries()[p];
        std::size_t const n = entry.value.size();
        std::vector<std::size_t> coords(n);
        std::iota(coords.begin(), coords.end(), std::size_t{0});
        if (options.samples_per_param != 0 && options.samples_per_param < n) {
            rng.shuffle(coords);
            coords.resize(options.samples_per_param);
            std::sort(coords.begin(), coords.end());
        }
        for (std::size_t k : coords) {
            double& w = entry.value.data()[k];
            double const saved = w;
            auto at = [&](double step) {
                w = saved + step;
                double const v = checked(loss(store, false));
                w = saved;
                return v;
            };
            double const e = options.eps;
            double const numeric = options.stencil == Stencil::two_point
                                       ? (at(e) - at(-e)) / (2.0 * e)
                                       : (8.0 * (at(e) - at(-e)) - (at(2.0 * e) - at(-2.0 * e))) / (12.0 * e);
            double const a = analytic[p][k];
            double const denom = std::max({std::abs(a), std::abs(numeric), 1e-8});
            double const rel = std::abs(a - numeric) / denom;
            ++result.coordinates;
            if (rel > result.max_rel_error) {
                result.max_rel_error = rel;
                result.worst_param = entry.name;
                result.worst_index = k;
            }
        }
    }
    return result;
}

}  // namespace discrimq::nn
