#pragma once

#include <optional>
#include <span>
#include <vector>

#include "aavr/core.hpp"
#include "aavr/rng.hpp"

namespace aavr::behavior {

/// Logit weights over region features; the last entry is the intercept.
struct PreferenceModel {
    std::vector<double> weights;

    std::size_t feature_dim() const { return weights.empty() ? 0 : weights.size() - 1; }
    double score(std::span<const double> features) const;
    bool operator==(const PreferenceModel&) const = default;
};

/// Feature vector of one candidate region as seen by one driver.  The bundled
/// simulator uses {search distance, expected pickups, median trip distance,
/// hour of day, day of week}.
struct RegionFeatures {
    std::vector<double> values;
};

inline constexpr std::size_t kSearchDistance = 0;
inline constexpr std::size_t kExpectedPickups = 1;
inline constexpr std::size_t kMedianTripDistance = 2;
inline constexpr std::size_t kHourOfDay = 3;
inline constexpr std::size_t kDayOfWeek = 4;
inline constexpr std::size_t kStandardFeatureDim = 5;

struct BetaBelief {
    double alpha = 1.0;
    double beta = 1.0;

    double mean() const { return alpha / (alpha + beta); }
    bool operator==(const BetaBelief&) const = default;
};

enum class DriverActivity { idle, repositioning, on_trip };

/// Current activity and, when busy, the minute the driver frees up.
struct DriverStatus {
    DriverActivity activity = DriverActivity::idle;
    double arrival_time = 0.0;
};

struct DriverAgent {
    DriverId id;
    RegionId region;
    PreferenceModel preference;
    BetaBelief belief_system;  // belief in the recommender's success rate
    BetaBelief belief_self;    // belief in the driver's own choices
    DriverStatus status;

    /// Case studies state mu and L directly instead of deriving them.
    std::optional<double> pinned_mu;
    std::optional<std::vector<double>> pinned_preference;

    bool idle() const { return status.activity == DriverActivity::idle; }

    /// idle -> repositioning / on_trip, and back to idle.  Any other
    /// transition throws std::logic_error.
    void start_repositioning(RegionId destination, double arrival_time);
    void start_trip(RegionId destination, double arrival_time);
    void become_idle();
};

/// L_c: normalised logistic scores over the candidate regions.
std::vector<double> preference_distribution(const PreferenceModel& model,
                                            std::span<const RegionFeatures> features);

/// Z-score each feature over the given regions.  Features with zero spread
/// become 0.
std::vector<RegionFeatures> standardize_features(std::span<const RegionFeatures> features);

/// One observed repositioning choice: the region picked and the features of
/// every candidate region at that moment.
struct PreferenceDecision {
    std::size_t chosen = 0;
    std::vector<RegionFeatures> regions;
};

/// A decision tagged with the driver and period it came from.
struct DecisionRecord {
    std::size_t driver = 0;
    long long period = 0;
    PreferenceDecision decision;
};

struct PreferenceFit {
    PreferenceModel model;
    bool degenerate = false;  // features carried no information; weights are zero
    int iterations = 0;
    double log_likelihood = 0.0;
};

struct FitOptions {
    double l2 = 1e-4;
    int max_iterations = 500;
    double initial_step = 1.0;
};

/// Regularised Bernoulli maximum likelihood over the label-augmented corpus
/// (chosen region labelled 1, every other candidate 0).
PreferenceFit fit_preference(std::span<const PreferenceDecision> history,
                             const FitOptions& options = {});

/// Fraction of decisions whose chosen region is the model's most likely one.
double top1_accuracy(const PreferenceModel& model, std::span<const PreferenceDecision> decisions);

/// Conjugate update: success adds eps1 to alpha, failure adds eps0 to beta.
BetaBelief update_belief(BetaBelief belief, bool success, double eps0, double eps1);

/// Thompson estimate of acceptance: share of M paired draws in which the
/// system belief beats the self belief.
double acceptance_probability(const BetaBelief& belief_system, const BetaBelief& belief_self,
                              int M, RandomStream& rng);

/// P(Theta_r > Theta_p) by quadrature.
double acceptance_probability_exact(const BetaBelief& belief_system,
                                    const BetaBelief& belief_self);

struct Decision {
    bool accepted = false;
    RegionId destination;
};

/// Accept the recommendation with probability mu, otherwise draw the
/// destination from the preference distribution.
Decision sample_decision(RegionId recommendation, double mu, std::span<const double> preference,
                         RandomStream& rng);

}  // namespace aavr::behavior
