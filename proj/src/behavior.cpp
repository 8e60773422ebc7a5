#include "aavr/behavior.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>
#include <string>

#include <boost/math/quadrature/tanh_sinh.hpp>
#include <boost/math/special_functions/beta.hpp>

namespace aavr::behavior {

namespace {

double log_sigmoid(double s) {
    return s >= 0.0 ? -std::log1p(std::exp(-s)) : s - std::log1p(std::exp(s));
}

double sigmoid(double s) {
    if (s >= 0.0) return 1.0 / (1.0 + std::exp(-s));
    const double e = std::exp(s);
    return e / (1.0 + e);
}

void check_features(const PreferenceModel& model, std::span<const RegionFeatures> features) {
    if (model.weights.empty()) throw InputError("preference model has no weights");
    for (const auto& f : features) {
        if (f.values.size() != model.feature_dim()) {
            throw InputError("region features have dimension " + std::to_string(f.values.size()) +
                             ", model expects " + std::to_string(model.feature_dim()));
        }
    }
}

}  // namespace

double PreferenceModel::score(std::span<const double> features) const {
    double s = weights.back();
    for (std::size_t k = 0; k < features.size(); ++k) s += weights[k] * features[k];
    return s;
}

void DriverAgent::start_repositioning(RegionId destination, double arrival_time) {
    if (!idle()) throw std::logic_error("driver must be idle to start repositioning");
    status = {DriverActivity::repositioning, arrival_time};
    region = destination;
}

void DriverAgent::start_trip(RegionId destination, double arrival_time) {
    if (!idle()) throw std::logic_error("driver must be idle to start a trip");
    status = {DriverActivity::on_trip, arrival_time};
    region = destination;
}

void DriverAgent::become_idle() {
    if (idle()) throw std::logic_error("driver is already idle");
    status = {DriverActivity::idle, status.arrival_time};
}

std::vector<double> preference_distribution(const PreferenceModel& model,
                                            std::span<const RegionFeatures> features) {
    check_features(model, features);
    if (features.empty()) throw InputError("preference distribution needs at least one region");
    std::vector<double> logs(features.size());
    for (std::size_t j = 0; j < features.size(); ++j) {
        logs[j] = log_sigmoid(model.score(features[j].values));
    }
    // Normalise in log space so tiny scores do not underflow to 0/0.
    const double top = *std::max_element(logs.begin(), logs.end());
    std::vector<double> out(features.size());
    double total = 0.0;
    for (std::size_t j = 0; j < logs.size(); ++j) {
        out[j] = std::exp(logs[j] - top);
        total += out[j];
    }
    for (double& v : out) v /= total;
    return out;
}

std::vector<RegionFeatures> standardize_features(std::span<const RegionFeatures> features) {
    std::vector<RegionFeatures> out(features.begin(), features.end());
    if (features.empty()) return out;
    const std::size_t dim = features.front().values.size();
    const double n = static_cast<double>(features.size());
    for (std::size_t k = 0; k < dim; ++k) {
        double mean = 0.0;
        for (const auto& f : features) mean += f.values[k];
        mean /= n;
        double var = 0.0;
        for (const auto& f : features) var += (f.values[k] - mean) * (f.values[k] - mean);
        const double sd = std::sqrt(var / n);
        for (auto& f : out) f.values[k] = sd > 1e-12 ? (f.values[k] - mean) / sd : 0.0;
    }
    return out;
}

PreferenceFit fit_preference(std::span<const PreferenceDecision> history, const FitOptions& options) {
    if (history.empty()) throw InputError("preference fitting needs at least one decision");
    const std::size_t dim = history.front().regions.empty()
                                ? 0
                                : history.front().regions.front().values.size();
    std::size_t rows = 0;
    for (const auto& d : history) {
        if (d.regions.empty() || d.chosen >= d.regions.size()) {
            throw InputError("decision has no candidate regions or an out-of-range choice");
        }
        for (const auto& r : d.regions) {
            if (r.values.size() != dim) throw InputError("decisions disagree on feature dimension");
        }
        rows += d.regions.size();
    }

    PreferenceFit fit;
    fit.model.weights.assign(dim + 1, 0.0);

    const auto& ref = history.front().regions.front().values;
    const bool degenerate = std::all_of(history.begin(), history.end(), [&](const auto& d) {
        return std::all_of(d.regions.begin(), d.regions.end(),
                           [&](const RegionFeatures& r) { return r.values == ref; });
    });
    if (degenerate) {
        fit.degenerate = true;
        return fit;
    }

    const double n = static_cast<double>(rows);
    auto objective = [&](const std::vector<double>& w) {
        PreferenceModel m{w};
        double ll = 0.0;
        for (const auto& d : history) {
            for (std::size_t j = 0; j < d.regions.size(); ++j) {
                const double s = m.score(d.regions[j].values);
                ll += j == d.chosen ? log_sigmoid(s) : log_sigmoid(-s);
            }
        }
        double reg = 0.0;
        for (std::size_t k = 0; k < dim; ++k) reg += w[k] * w[k];
        return ll / n - 0.5 * options.l2 * reg;
    };

    std::vector<double> w = fit.model.weights;
    double current = objective(w);
    double step = options.initial_step;
    std::vector<double> grad(dim + 1);
    int it = 0;
    for (; it < options.max_iterations; ++it) {
        std::fill(grad.begin(), grad.end(), 0.0);
        PreferenceModel m{w};
        for (const auto& d : history) {
            for (std::size_t j = 0; j < d.regions.size(); ++j) {
                const auto& z = d.regions[j].values;
                const double residual = (j == d.chosen ? 1.0 : 0.0) - sigmoid(m.score(z));
                for (std::size_t k = 0; k < dim; ++k) grad[k] += residual * z[k];
                grad[dim] += residual;
            }
        }
        double norm2 = 0.0;
        for (std::size_t k = 0; k <= dim; ++k) {
            grad[k] /= n;
            if (k < dim) grad[k] -= options.l2 * w[k];
            norm2 += grad[k] * grad[k];
        }
        if (norm2 < 1e-20) break;

        bool improved = false;
        for (int halvings = 0; halvings < 40; ++halvings) {
            std::vector<double> trial(w);
            for (std::size_t k = 0; k <= dim; ++k) trial[k] += step * grad[k];
            const double value = objective(trial);
            if (value >= current) {
                w = std::move(trial);
                current = value;
                improved = true;
                break;
            }
            step *= 0.5;
        }
        if (!improved) break;
    }
    fit.model.weights = std::move(w);
    fit.iterations = it;
    fit.log_likelihood = current;
    return fit;
}

double top1_accuracy(const PreferenceModel& model, std::span<const PreferenceDecision> decisions) {
    if (decisions.empty()) return 0.0;
    std::size_t hits = 0;
    for (const auto& d : decisions) {
        const auto L = preference_distribution(model, d.regions);
        const auto best = static_cast<std::size_t>(std::max_element(L.begin(), L.end()) - L.begin());
        if (best == d.chosen) ++hits;
    }
    return static_cast<double>(hits) / static_cast<double>(decisions.size());
}

BetaBelief update_belief(BetaBelief belief, bool success, double eps0, double eps1) {
    if (success) {
        belief.alpha += eps1;
    } else {
        belief.beta += eps0;
    }
    return belief;
}

double acceptance_probability(const BetaBelief& belief_system, const BetaBelief& belief_self,
                              int M, RandomStream& rng) {
    if (M < 1) throw InputError("acceptance probability needs M >= 1");
    int wins = 0;
    for (int i = 0; i < M; ++i) {
        const double r = rng.beta(belief_system.alpha, belief_system.beta);
        const double p = rng.beta(belief_self.alpha, belief_self.beta);
        if (r > p) ++wins;
    }
    return static_cast<double>(wins) / static_cast<double>(M);
}

double acceptance_probability_exact(const BetaBelief& belief_system,
                                    const BetaBelief& belief_self) {
    // P(R > P) = integral over x of f_R(x) * F_P(x).
    auto integrand = [&](double x) {
        if (x <= 0.0 || x >= 1.0) return 0.0;
        return boost::math::ibeta_derivative(belief_system.alpha, belief_system.beta, x) *
               boost::math::ibeta(belief_self.alpha, belief_self.beta, x);
    };
    boost::math::quadrature::tanh_sinh<double> integrator;
    const double value = integrator.integrate(integrand, 0.0, 1.0, 1e-12);
    return std::clamp(value, 0.0, 1.0);
}

Decision sample_decision(RegionId recommendation, double mu, std::span<const double> preference,
                         RandomStream& rng) {
    if (rng.bernoulli(mu)) return {true, recommendation};
    return {false, RegionId{rng.categorical(preference)}};
}

}  // namespace aavr::behavior
