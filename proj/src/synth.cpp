#include "stepcast/synth.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <numeric>
#include <set>
#include <sstream>

namespace stepcast::synth {

const char* to_string(Rhythm rhythm) {
    switch (rhythm) {
        case Rhythm::Commuter: return "commuter";
        case Rhythm::Homebody: return "homebody";
        case Rhythm::Athlete: return "athlete";
        case Rhythm::Mixed: return "mixed";
    }
    return "?";
}

std::optional<Rhythm> parse_rhythm(const std::string& name) {
    if (name == "commuter") return Rhythm::Commuter;
    if (name == "homebody") return Rhythm::Homebody;
    if (name == "athlete") return Rhythm::Athlete;
    if (name == "mixed") return Rhythm::Mixed;
    return std::nullopt;
}

const char* to_string(CohortFormat format) {
    return format == CohortFormat::Pedometer ? "pedometer" : "storyline";
}

std::optional<CohortFormat> parse_cohort_format(const std::string& name) {
    if (name == "pedometer") return CohortFormat::Pedometer;
    if (name == "storyline") return CohortFormat::Storyline;
    return std::nullopt;
}

void CohortSpec::validate() const {
    if (n_users < 1) fail(ErrorKind::InvalidSpec, "n_users must be at least 1");
    if (n_days < 2) fail(ErrorKind::InvalidSpec, "n_days must be at least 2");
    if (!(goal_hit_rate_target > 0.0 && goal_hit_rate_target < 1.0))
        fail(ErrorKind::InvalidSpec, "goal_hit_rate_target must lie strictly inside (0, 1)");
    if (base_rate_min <= 0.0 || base_rate_min >= base_rate_max)
        fail(ErrorKind::InvalidSpec, "base_rate_range must satisfy 0 < min < max");
    if (!(base_rate_min < 10000.0 && base_rate_max > 10000.0))
        fail(ErrorKind::InvalidSpec,
             "base_rate_range must straddle the 10000-step goal to allow both outcomes");
    if (weekday_multiplier <= 0.0)
        fail(ErrorKind::InvalidSpec, "weekday_multiplier must be positive");
    if (!start_date.valid()) fail(ErrorKind::InvalidSpec, "start_date is not a calendar date");
}

namespace {

// Hour-to-hour log-scale momentum: l_h = phi * l_{h-1} + sigma_w * z.
constexpr double kPhi = 0.90;
constexpr double kSigmaW = 0.22;
const double kSigmaL = kSigmaW / std::sqrt(1.0 - kPhi * kPhi);  // stationary sd

// Wearers who track a goal behave differently near it: a day that would land
// just short gets abandoned, a day just past it gets its victory lap. Days are
// therefore kept this relative margin away from the goal, which also keeps the
// achieved/missed classes cleanly separated after per-hour integer rounding
// in the emitters (at most 12 steps of drift against a 400-step margin).
constexpr double kGoal = 10000.0;
constexpr double kGoalMargin = 0.04;

// Per-user hit probabilities. Habitual achievers clear the goal on most days,
// the rest miss on most days, and both ranges leave enough day-to-day slack
// that single days regularly cross the line, so an outcome genuinely depends
// on how that particular day unfolds rather than on the user alone.
constexpr double kAchieverHitLo = 0.45;
constexpr double kAchieverHitHi = 0.75;
constexpr double kMisserHitLo = 0.25;
constexpr double kMisserHitHi = 0.55;

// Nocturnal steps are a small absolute floor (restlessness, a bathroom trip):
// they do not scale with how active the wearer is by day, so night hours say
// nothing about the user's daily volume or where the day is heading.
constexpr double kNightFloor = 12.0;  // median steps per night hour
constexpr double kNightSigma = 0.8;   // lognormal spread of that floor

constexpr bool is_night_hour(int h) { return h < 6 || h >= 22; }

enum class Shape { Commuter, Homebody, Athlete };

// Waking-hour weights (night hours stay zero; they get the absolute floor
// instead). Days are back-loaded for every shape: errands, workouts, and the
// homeward commute land after work, so most of a day's outcome is still open
// in the morning and settles through the late afternoon and evening.
std::array<double, 24> base_weights(Shape shape) {
    std::array<double, 24> w{};
    switch (shape) {
        case Shape::Commuter:
            w[6] = 0.5;
            for (int h = 7; h <= 9; ++h) w[h] = 1.2;
            for (int h = 10; h <= 16; ++h) w[h] = 0.75 + 0.1 * (h - 10);
            for (int h = 17; h <= 19; ++h) w[h] = 4.2;
            for (int h = 20; h <= 21; ++h) w[h] = 1.6;
            break;
        case Shape::Homebody:
            w[6] = 0.3;
            for (int h = 7; h <= 21; ++h) w[h] = 1.0;
            break;
        case Shape::Athlete:
            w[6] = 0.3;
            for (int h = 7; h <= 21; ++h) w[h] = 0.7;
            break;
    }
    return w;
}

void normalize(std::array<double, 24>& w) {
    double total = std::accumulate(w.begin(), w.end(), 0.0);
    for (auto& v : w) v /= total;
}

struct UserPlan {
    std::string user_id;
    Shape shape = Shape::Commuter;
    int block_hour = 12;  // athlete workout anchor
    double base_rate = 10000.0;
    bool achiever = false;
};

// (1 - q)-quantile of the simulated waking-hour day factor: the base rate B
// with B * quantile + expected night floor = goal gives the user hit
// probability ~q. Night hours contribute nothing here because their floor is
// independent of B.
double day_factor_quantile(Shape shape, int block_hour, double q, Rng& rng) {
    constexpr int kSamples = 256;
    std::array<double, 24> weights = base_weights(shape);
    if (shape == Shape::Athlete) {
        weights[block_hour] += 8.0;
        weights[block_hour + 1] += 4.0;
    }
    normalize(weights);
    std::vector<double> factors(kSamples);
    for (int s = 0; s < kSamples; ++s) {
        double l = rng.normal(0.0, kSigmaL);
        double total = 0.0;
        for (int h = 0; h < 24; ++h) {
            if (h > 0) l = kPhi * l + kSigmaW * rng.normal();
            total += weights[h] * std::exp(l - 0.5 * kSigmaL * kSigmaL);
        }
        factors[s] = total;
    }
    std::sort(factors.begin(), factors.end());
    auto idx = static_cast<std::size_t>((1.0 - q) * kSamples);
    return factors[std::min(idx, factors.size() - 1)];
}

std::string make_user_id(int index, int n_users) {
    int width = 3;
    for (int v = n_users; v >= 1000; v /= 10) ++width;
    std::string digits = std::to_string(index + 1);
    return "u" + std::string(static_cast<std::size_t>(width) - digits.size(), '0') + digits;
}

struct DayDraw {
    std::array<double, 24> hour_steps{};  // real-valued steps per hour
    int block_hour = 12;
};

DayDraw draw_day(const UserPlan& plan, bool weekday, double weekday_multiplier, Rng& rng) {
    DayDraw day;
    std::array<double, 24> weights = base_weights(plan.shape);
    day.block_hour = plan.block_hour;
    if (plan.shape == Shape::Athlete) {
        day.block_hour =
            std::clamp(plan.block_hour + static_cast<int>(rng.int_range(-1, 1)), 16, 20);
        weights[day.block_hour] += 8.0;
        weights[day.block_hour + 1] += 4.0;
    }
    normalize(weights);

    double mult = weekday ? weekday_multiplier : 1.0;
    double l = rng.normal(0.0, kSigmaL);
    for (int h = 0; h < 24; ++h) {
        if (h > 0) l = kPhi * l + kSigmaW * rng.normal();
        if (is_night_hour(h))
            day.hour_steps[h] = kNightFloor * std::exp(rng.normal(0.0, kNightSigma));
        else
            day.hour_steps[h] =
                plan.base_rate * mult * weights[h] * std::exp(l - 0.5 * kSigmaL * kSigmaL);
    }

    // Goal-proximity adjustment: rescale the whole day out of the dead zone
    // on whichever side it already fell. Consumes no randomness, so the draw
    // stream (and with it per-user reproducibility) is unaffected.
    double total = std::accumulate(day.hour_steps.begin(), day.hour_steps.end(), 0.0);
    double low_edge = kGoal * (1.0 - kGoalMargin);
    double high_edge = kGoal * (1.0 + kGoalMargin);
    if (total > low_edge && total < high_edge) {
        double target = total >= kGoal ? high_edge : low_edge;
        double scale = target / total;
        for (auto& v : day.hour_steps) v *= scale;
    }
    return day;
}

ingest::MinuteSeries emit_pedometer(const UserPlan& plan, Date date, const DayDraw& day,
                                    Rng& rng) {
    ingest::MinuteSeries series;
    series.user_id = plan.user_id;
    series.date = date;
    series.steps_per_minute.assign(1440, 0);
    for (int h = 0; h < 24; ++h) {
        auto steps = static_cast<std::int64_t>(std::llround(day.hour_steps[h]));
        if (steps <= 0) continue;
        auto span_minutes = static_cast<int>(rng.int_range(18, 48));
        auto offset = static_cast<int>(rng.int_range(0, 60 - span_minutes));
        std::int64_t base = steps / span_minutes;
        std::int64_t extra = steps % span_minutes;
        for (int m = 0; m < span_minutes; ++m) {
            std::int64_t value = base + (m < extra ? 1 : 0);
            series.steps_per_minute[static_cast<std::size_t>(h * 60 + offset + m)] =
                static_cast<std::uint32_t>(value);
        }
    }
    return series;
}

const char* place_name_for(const std::string& type) {
    if (type == "home") return "Home";
    if (type == "work") return "Office";
    if (type == "gym") return "Gym";
    if (type == "transit") return "Station";
    return "Errand";
}

ingest::StorylineDay emit_storyline(const UserPlan& plan, Date date, const DayDraw& day,
                                    Rng& rng) {
    ingest::StorylineDay doc;
    doc.user_id = plan.user_id;
    doc.date = date;

    auto n_segments = static_cast<int>(rng.int_range(3, 12));
    int window_start = static_cast<int>(rng.int_range(5 * 60, 8 * 60));    // minutes
    int window_end = static_cast<int>(rng.int_range(20 * 60, 23 * 60));

    std::set<int> cuts;
    while (static_cast<int>(cuts.size()) < n_segments - 1)
        cuts.insert(static_cast<int>(rng.int_range(window_start + 1, window_end - 1)));
    std::vector<int> bounds;
    bounds.push_back(window_start);
    bounds.insert(bounds.end(), cuts.begin(), cuts.end());
    bounds.push_back(window_end);

    struct Piece {
        int start_sec;
        int end_sec;
        bool keep;
    };
    std::vector<Piece> pieces;
    for (std::size_t i = 0; i + 1 < bounds.size(); ++i)
        pieces.push_back({bounds[i] * 60, bounds[i + 1] * 60, true});
    int kept = static_cast<int>(pieces.size());
    for (auto& piece : pieces) {
        if (kept > 3 && rng.uniform() < 0.15) {
            piece.keep = false;  // tracker gap
            --kept;
        }
    }

    // Hour totals are spread over the covered minutes of each hour, so gaps
    // do not silently erase a slice of the day's activity.
    std::array<double, 24> covered{};
    for (const auto& piece : pieces) {
        if (!piece.keep) continue;
        for (int h = 0; h < 24; ++h) {
            int lo = std::max(piece.start_sec, h * 3600);
            int hi = std::min(piece.end_sec, (h + 1) * 3600);
            if (hi > lo) covered[h] += hi - lo;
        }
    }

    for (const auto& piece : pieces) {
        if (!piece.keep) continue;
        double steps_real = 0.0;
        for (int h = 0; h < 24; ++h) {
            if (covered[h] <= 0.0) continue;
            int lo = std::max(piece.start_sec, h * 3600);
            int hi = std::min(piece.end_sec, (h + 1) * 3600);
            if (hi > lo) steps_real += day.hour_steps[h] * (hi - lo) / covered[h];
        }

        ingest::Segment segment;
        segment.user_id = plan.user_id;
        segment.date = date;
        segment.start = piece.start_sec;
        segment.end = piece.end_sec;
        segment.steps = static_cast<std::uint32_t>(std::max<std::int64_t>(
            0, std::llround(steps_real)));

        if (rng.uniform() < 0.25) {
            segment.kind = ingest::SegmentKind::Transition;
        } else {
            segment.kind = ingest::SegmentKind::Location;
            int mid_hour = (piece.start_sec + piece.end_sec) / 2 / 3600;
            std::string type;
            double roll = rng.uniform();
            if (roll < 0.05) {
                type = "transit";
            } else if (roll < 0.15) {
                type = "other";
            } else if (plan.shape == Shape::Athlete && mid_hour >= day.block_hour &&
                       mid_hour <= day.block_hour + 1) {
                type = "gym";
            } else if (plan.shape != Shape::Homebody && mid_hour >= 9 && mid_hour < 18) {
                type = "work";
            } else {
                type = "home";
            }
            segment.place_type = type;
            segment.place_name = place_name_for(type);
        }
        doc.segments.push_back(std::move(segment));
    }
    return doc;
}

ingest::UserProfile make_profile(const UserPlan& plan, Rng& rng) {
    ingest::UserProfile profile;
    profile.user_id = plan.user_id;
    if (rng.uniform() < 0.5) profile.step_goal = 10000;
    if (rng.uniform() < 0.85) profile.gender = rng.uniform() < 0.5 ? "f" : "m";
    if (rng.uniform() < 0.9) profile.age = static_cast<std::uint32_t>(18 + rng.int_range(0, 49));
    if (rng.uniform() < 0.7) {
        static const std::array<const char*, 4> kMotivations = {"health", "competition", "habit",
                                                                "social"};
        profile.motivation = kMotivations[static_cast<std::size_t>(rng.int_range(0, 3))];
    }
    return profile;
}

}  // namespace

CohortData generate_cohort(const CohortSpec& spec) {
    spec.validate();

    double average_multiplier = (5.0 * spec.weekday_multiplier + 2.0) / 7.0;

    // The realized hit rate is the cohort mean of the per-user hit
    // probabilities, so the achiever share is solved from the range means to
    // put that mean on the requested target. Once the target falls outside
    // what the two ranges can mix to, the share saturates and the leftover
    // bias is pushed into the ranges themselves as a shift.
    double achiever_mean = 0.5 * (kAchieverHitLo + kAchieverHitHi);
    double misser_mean = 0.5 * (kMisserHitLo + kMisserHitHi);
    double achiever_share = std::clamp(
        (spec.goal_hit_rate_target - misser_mean) / (achiever_mean - misser_mean), 0.0, 1.0);
    double hit_shift = spec.goal_hit_rate_target -
                       (achiever_share * achiever_mean + (1.0 - achiever_share) * misser_mean);

    CohortData data;
    data.days.reserve(static_cast<std::size_t>(spec.n_users) *
                      static_cast<std::size_t>(spec.n_days));
    data.profiles.reserve(static_cast<std::size_t>(spec.n_users));

    for (int u = 0; u < spec.n_users; ++u) {
        Rng rng(mix_seed(spec.seed, 0x100000 + static_cast<std::uint64_t>(u)));

        UserPlan plan;
        plan.user_id = make_user_id(u, spec.n_users);
        // Achiever status is a per-user Bernoulli from its own derived stream,
        // never a cohort-wide draw: a user's documents must not change when
        // the cohort around them grows or shrinks. The realized rate drifts
        // binomially around the target, well inside the declared band.
        Rng assign_rng(mix_seed(spec.seed, 0x300000 + static_cast<std::uint64_t>(u)));
        plan.achiever = assign_rng.uniform() < achiever_share;
        switch (spec.rhythm) {
            case Rhythm::Commuter: plan.shape = Shape::Commuter; break;
            case Rhythm::Homebody: plan.shape = Shape::Homebody; break;
            case Rhythm::Athlete: plan.shape = Shape::Athlete; break;
            case Rhythm::Mixed:
                plan.shape = static_cast<Shape>(rng.int_range(0, 2));
                break;
        }
        plan.block_hour = static_cast<int>(rng.int_range(17, 20));  // after-work workout

        // Hit probability this user should have, then the base rate that
        // produces it under the simulated day-factor distribution.
        double hit_lo = plan.achiever ? kAchieverHitLo : kMisserHitLo;
        double hit_hi = plan.achiever ? kAchieverHitHi : kMisserHitHi;
        double q = rng.uniform(std::clamp(hit_lo + hit_shift, 0.02, 0.98),
                               std::clamp(hit_hi + hit_shift, 0.02, 0.98));
        Rng calibration_rng(mix_seed(spec.seed, 0x200000 + static_cast<std::uint64_t>(u)));
        double quantile = day_factor_quantile(plan.shape, plan.block_hour, q, calibration_rng);
        double night_expected = 8.0 * kNightFloor * std::exp(0.5 * kNightSigma * kNightSigma);
        plan.base_rate = (kGoal - night_expected) / (average_multiplier * quantile);
        plan.base_rate = std::clamp(plan.base_rate, spec.base_rate_min, spec.base_rate_max);

        data.profiles.push_back(make_profile(plan, rng));

        for (int d = 0; d < spec.n_days; ++d) {
            Date date = Date::from_day_number(spec.start_date.day_number() + d);
            DayDraw day = draw_day(plan, date.is_weekday(), spec.weekday_multiplier, rng);
            if (spec.format == CohortFormat::Pedometer)
                data.days.emplace_back(emit_pedometer(plan, date, day, rng));
            else
                data.days.emplace_back(emit_storyline(plan, date, day, rng));
        }
    }
    return data;
}

std::string weather_fixture_csv(const CohortSpec& spec) {
    spec.validate();
    Rng rng(mix_seed(spec.seed, 0x77ea7e12));
    std::ostringstream out;
    out << "date,condition,temperature_c\n";
    for (int d = 0; d < spec.n_days; ++d) {
        Date date = Date::from_day_number(spec.start_date.day_number() + d);
        double roll = rng.uniform();
        const char* condition = roll < 0.40   ? "clear"
                                : roll < 0.70 ? "cloudy"
                                : roll < 0.85 ? "rain"
                                : roll < 0.95 ? "fog"
                                              : "snow";
        double temperature = std::round(rng.uniform(-5.0, 25.0) * 10.0) / 10.0;
        out << date.to_string() << ',' << condition << ',' << format_double(temperature) << '\n';
    }
    return out.str();
}

}  // namespace stepcast::synth
