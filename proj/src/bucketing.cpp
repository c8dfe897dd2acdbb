#include "stepcast/bucketing.hpp"

#include <algorithm>
#include <cassert>
#include <set>
#include <sstream>

namespace stepcast::bucketing {

namespace {

constexpr int kSecondsPerHour = 3600;

int overlap_seconds(int a_start, int a_end, int b_start, int b_end) {
    return std::max(0, std::min(a_end, b_end) - std::max(a_start, b_start));
}

std::vector<std::string> split_csv_line(const std::string& line) {
    std::vector<std::string> fields;
    std::string field;
    std::istringstream in(line);
    while (std::getline(in, field, ',')) fields.push_back(field);
    if (!line.empty() && line.back() == ',') fields.emplace_back();
    return fields;
}

std::string trim(const std::string& s) {
    auto b = s.find_first_not_of(" \t\r\n");
    if (b == std::string::npos) return "";
    auto e = s.find_last_not_of(" \t\r\n");
    return s.substr(b, e - b + 1);
}

}  // namespace

HourlyDay bucket_minutes(const ingest::MinuteSeries& series) {
    HourlyDay day;
    day.user_id = series.user_id;
    day.date = series.date;
    day.source = DaySource::Pedometer;
    for (int h = 0; h < 24; ++h) {
        double sum = 0.0;
        for (int m = 60 * h; m < 60 * (h + 1); ++m) sum += series.steps_per_minute[m];
        day.buckets[h] = sum;
        day.steps_today += sum;
    }
    return day;
}

HourlyDay bucket_segments(const ingest::StorylineDay& source_day, SplitRule rule) {
    HourlyDay day;
    day.user_id = source_day.user_id;
    day.date = source_day.date;
    day.source = DaySource::Storyline;
    for (const auto& seg : source_day.segments) {
        // Buckets are half-open [h:00, h+1:00); a segment ending exactly on an
        // hour boundary does not touch the next bucket.
        assert(seg.start < seg.end);
        int first = seg.start / kSecondsPerHour;
        int last = (seg.end - 1) / kSecondsPerHour;
        if (rule == SplitRule::EqualPerBucket) {
            double share = static_cast<double>(seg.steps) / (last - first + 1);
            for (int h = first; h <= last; ++h) day.buckets[h] += share;
        } else {
            double span = seg.end - seg.start;
            for (int h = first; h <= last; ++h) {
                int ov = overlap_seconds(seg.start, seg.end, h * kSecondsPerHour,
                                         (h + 1) * kSecondsPerHour);
                day.buckets[h] += seg.steps * (ov / span);
            }
        }
    }
    for (double b : day.buckets) day.steps_today += b;
    return day;
}

std::array<std::optional<std::string>, 24> dominant_place_types(const ingest::StorylineDay& day) {
    std::array<std::optional<std::string>, 24> result;
    std::array<int, 24> best_overlap{};
    for (const auto& seg : day.segments) {
        if (seg.kind != ingest::SegmentKind::Location || !seg.place_type) continue;
        int first = seg.start / kSecondsPerHour;
        int last = (seg.end - 1) / kSecondsPerHour;
        for (int h = first; h <= last; ++h) {
            int ov = overlap_seconds(seg.start, seg.end, h * kSecondsPerHour,
                                     (h + 1) * kSecondsPerHour);
            // Strictly greater keeps the earliest-starting segment on ties.
            if (ov > best_overlap[h]) {
                best_overlap[h] = ov;
                result[h] = *seg.place_type;
            }
        }
    }
    return result;
}

HourlyDay to_hourly(const ingest::RawDay& day, SplitRule rule) {
    if (const auto* minutes = std::get_if<ingest::MinuteSeries>(&day)) {
        return bucket_minutes(*minutes);
    }
    const auto& storyline = std::get<ingest::StorylineDay>(day);
    HourlyDay hourly = bucket_segments(storyline, rule);
    hourly.hourly_place_type = dominant_place_types(storyline);
    return hourly;
}

WeatherTable WeatherTable::load(const std::filesystem::path& csv_path) {
    return parse(ingest::read_file(csv_path));
}

WeatherTable WeatherTable::parse(const std::string& csv_text) {
    WeatherTable table;
    std::set<std::string> allowed = {"clear", "cloudy", "rain", "snow", "fog"};

    std::istringstream in(csv_text);
    std::string line;
    bool header_seen = false;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        line = trim(line);
        if (line.empty()) continue;
        if (line[0] == '#') {
            if (header_seen) fail(ErrorKind::MalformedFixture, "comment after header");
            auto pos = line.find("conditions:");
            if (pos != std::string::npos) {
                allowed.clear();
                for (const auto& c : split_csv_line(line.substr(pos + 11))) {
                    if (!trim(c).empty()) allowed.insert(trim(c));
                }
                if (allowed.empty()) fail(ErrorKind::MalformedFixture, "empty condition set");
            }
            continue;
        }
        if (!header_seen) {
            if (line != "date,condition,temperature_c")
                fail(ErrorKind::MalformedFixture,
                     "expected header 'date,condition,temperature_c', got '" + line + "'");
            header_seen = true;
            continue;
        }
        auto fields = split_csv_line(line);
        if (fields.size() != 3)
            fail(ErrorKind::MalformedFixture, "line " + std::to_string(line_no) + ": need 3 fields");
        auto date = Date::parse(trim(fields[0]));
        if (!date) fail(ErrorKind::MalformedFixture, "bad date '" + fields[0] + "'");
        std::string condition = trim(fields[1]);
        if (!allowed.count(condition))
            fail(ErrorKind::MalformedFixture, "condition '" + condition + "' not in the declared set");
        double temperature = 0.0;
        try {
            temperature = std::stod(trim(fields[2]));
        } catch (const std::exception&) {
            fail(ErrorKind::MalformedFixture, "bad temperature '" + fields[2] + "'");
        }
        if (!table.entries_.emplace(*date, WeatherObs{condition, temperature}).second)
            fail(ErrorKind::MalformedFixture, "duplicate date " + date->to_string());
    }
    if (!header_seen) fail(ErrorKind::MalformedFixture, "missing header row");
    return table;
}

std::optional<WeatherObs> WeatherTable::lookup(const Date& date) const {
    auto it = entries_.find(date);
    if (it == entries_.end()) return std::nullopt;
    return it->second;
}

HourlyDay attach_weather(HourlyDay day, const WeatherTable& fixtures) {
    if (auto obs = fixtures.lookup(day.date)) day.weather = *obs;
    return day;
}

}  // namespace stepcast::bucketing
