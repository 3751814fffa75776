#include "finaug/procgen.hpp"

#include <cmath>

#include "finaug/errors.hpp"

namespace finaug {
namespace {

constexpr std::uint64_t kGbmStreamTag = 0x67626d00ULL;     // "gbm"
constexpr std::uint64_t kHestonStreamTag = 0x68657374ULL;  // "hest"

[[noreturn]] void throw_non_positive(std::size_t step, double value) {
    throw non_positive_price_generated(step, value);
}

}  // namespace

void gbm_params::validate() const {
    if (!(s0 > 0.0)) throw invalid_parameter("initial price must be > 0");
    if (sigma < 0.0) throw invalid_parameter("volatility must be >= 0");
    if (!std::isfinite(s0) || !std::isfinite(r) || !std::isfinite(sigma))
        throw non_finite_value("gbm parameters");
}

void heston_params::validate() const {
    if (!(s0 > 0.0)) throw invalid_parameter("initial price must be > 0");
    if (nu0 < 0.0 || kappa < 0.0 || theta < 0.0 || xi < 0.0)
        throw invalid_parameter("nu0, kappa, theta, xi must be >= 0");
    if (rho < -1.0 || rho > 1.0)
        throw invalid_parameter("rho must be in [-1, 1]");
    if (!(dt > 0.0)) throw invalid_parameter("dt must be > 0");
}

price_series simulate_gbm(const gbm_params& params, std::size_t T,
                          const noise_source& noise,
                          std::uint64_t trajectory) {
    params.validate();
    if (T < 1) throw invalid_parameter("need at least one step");

    substream stream = noise.stream(kGbmStreamTag, trajectory);
    price_series out;
    out.prices.resize(T + 1);
    out.prices[0] = params.s0;
    for (std::size_t t = 0; t < T; ++t) {
        const double s = out.prices[t];
        const double eta = stream.next();
        const double next = (1.0 + params.r) * s + params.sigma * s * eta;
        if (!(next > 0.0)) throw_non_positive(t + 1, next);
        out.prices[t + 1] = next;
    }
    return out;
}

heston_path simulate_heston(const heston_params& params, std::size_t T,
                            const noise_source& noise,
                            std::uint64_t trajectory) {
    params.validate();
    if (T < 1) throw invalid_parameter("need at least one step");

    // kappa == xi == 0 degenerates to the constant-volatility walk; use the
    // same stream tag so the paths coincide exactly in that case.
    const bool degenerate = params.kappa == 0.0 && params.xi == 0.0;
    substream stream = noise.stream(degenerate ? kGbmStreamTag : kHestonStreamTag,
                                    trajectory);

    const double corr_orth = std::sqrt(1.0 - params.rho * params.rho);

    heston_path out;
    out.prices.prices.resize(T + 1);
    out.variance.resize(T + 1);
    out.prices.prices[0] = params.s0;
    out.variance[0] = params.nu0;
    for (std::size_t t = 0; t < T; ++t) {
        const double s = out.prices.prices[t];
        const double nu_plus = out.variance[t] > 0.0 ? out.variance[t] : 0.0;
        const double vol_step = std::sqrt(nu_plus * params.dt);

        const double eta_s = stream.next();
        // The variance shock is drawn only when it can matter (xi > 0), so a
        // xi = 0 run consumes the price-shock stream exactly like the
        // constant-volatility generator.
        double eta_nu = 0.0;
        if (params.xi > 0.0)
            eta_nu = params.rho * eta_s + corr_orth * stream.next();

        const double next_s =
            (1.0 + params.r * params.dt) * s + vol_step * s * eta_s;
        if (!(next_s > 0.0)) throw_non_positive(t + 1, next_s);
        out.prices.prices[t + 1] = next_s;

        out.variance[t + 1] = out.variance[t] +
                              params.kappa * (params.theta - nu_plus) * params.dt +
                              params.xi * vol_step * eta_nu;
    }
    return out;
}

std::vector<price_series> simulate_gbm_batch(const gbm_params& params,
                                             std::size_t T, std::size_t n,
                                             const noise_source& noise) {
    std::vector<price_series> out;
    out.reserve(n);
    for (std::size_t i = 0; i < n; ++i)
        out.push_back(simulate_gbm(params, T, noise, i));
    return out;
}

}  // namespace finaug
