#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "stepcast/core.hpp"
#include "stepcast/ingest.hpp"

namespace stepcast::synth {

enum class Rhythm { Commuter, Homebody, Athlete, Mixed };
enum class CohortFormat { Pedometer, Storyline };

const char* to_string(Rhythm rhythm);
std::optional<Rhythm> parse_rhythm(const std::string& name);
const char* to_string(CohortFormat format);
std::optional<CohortFormat> parse_cohort_format(const std::string& name);

struct CohortSpec {
    int n_users = 80;
    int n_days = 60;
    std::uint64_t seed = 0;
    double base_rate_min = 4000.0;   // steps/day
    double base_rate_max = 16000.0;  // steps/day
    double weekday_multiplier = 1.1;
    Rhythm rhythm = Rhythm::Mixed;
    double goal_hit_rate_target = 0.5;
    CohortFormat format = CohortFormat::Pedometer;
    Date start_date{2015, 2, 2};  // a Monday

    void validate() const;  // InvalidSpec on violation
};

struct CohortData {
    std::vector<ingest::RawDay> days;          // user-major, chronological per user
    std::vector<ingest::UserProfile> profiles;  // one per user, in user order
};

// Deterministic given spec.seed; each user draws from an independent derived
// stream, so generating any subset of users reproduces exactly the same
// documents. Daily totals carry an hour-to-hour AR(1) momentum on top of a
// per-user rhythm, which is what makes late hours far more informative about
// the day's outcome than early ones. Per-user base rates are calibrated
// against a simulated day-factor distribution so the cohort's goal-hit rate
// lands near goal_hit_rate_target at the 10000-step goal.
CohortData generate_cohort(const CohortSpec& spec);

// Deterministic weather rows (date,condition,temperature_c) covering the
// cohort's date range, for feeding the weather fixture loader.
std::string weather_fixture_csv(const CohortSpec& spec);

}  // namespace stepcast::synth
