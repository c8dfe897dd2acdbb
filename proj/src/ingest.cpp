#include "stepcast/ingest.hpp"

#include <algorithm>
#include <fstream>
#include <map>
#include <numeric>
#include <set>

#include "json.hpp"

namespace stepcast::ingest {

namespace {

using nlohmann::json;

json parse_json(const std::string& document) {
    json doc = json::parse(document, nullptr, false);
    if (doc.is_discarded()) fail(ErrorKind::MalformedDocument, "not valid JSON");
    if (!doc.is_object()) fail(ErrorKind::MalformedDocument, "top level must be an object");
    return doc;
}

std::string require_string(const json& obj, const char* key) {
    if (!obj.contains(key) || !obj[key].is_string())
        fail(ErrorKind::MalformedDocument, std::string("missing string field '") + key + "'");
    return obj[key].get<std::string>();
}

Date require_date(const json& obj, const char* key) {
    auto d = Date::parse(require_string(obj, key));
    if (!d) fail(ErrorKind::MalformedDocument, std::string("bad date in field '") + key + "'");
    return *d;
}

std::int64_t require_int(const json& obj, const char* key) {
    if (!obj.contains(key) || !obj[key].is_number_integer())
        fail(ErrorKind::MalformedDocument, std::string("missing integer field '") + key + "'");
    return obj[key].get<std::int64_t>();
}

int require_time(const json& obj, const char* key) {
    auto t = timeofday::parse(require_string(obj, key));
    if (!t)
        fail(ErrorKind::InvalidValue,
             std::string("bad time of day in field '") + key + "' (segments must not cross midnight)");
    return *t;
}

}  // namespace

std::uint64_t MinuteSeries::total_steps() const {
    return std::accumulate(steps_per_minute.begin(), steps_per_minute.end(), std::uint64_t{0});
}

std::uint64_t StorylineDay::total_steps() const {
    std::uint64_t total = 0;
    for (const auto& seg : segments) total += seg.steps;
    return total;
}

const std::string& raw_day_user(const RawDay& day) {
    return std::visit([](const auto& d) -> const std::string& { return d.user_id; }, day);
}

Date raw_day_date(const RawDay& day) {
    return std::visit([](const auto& d) { return d.date; }, day);
}

const char* raw_day_source(const RawDay& day) {
    return std::holds_alternative<MinuteSeries>(day) ? "pedometer" : "storyline";
}

MinuteSeries parse_fitbit_day(const std::string& document) {
    json doc = parse_json(document);
    if (require_string(doc, "source") != "pedometer")
        fail(ErrorKind::MalformedDocument, "source must be 'pedometer'");
    MinuteSeries series;
    series.user_id = require_string(doc, "user");
    series.date = require_date(doc, "date");
    series.steps_per_minute.assign(1440, 0);

    if (!doc.contains("entries") || !doc["entries"].is_array())
        fail(ErrorKind::MalformedDocument, "missing 'entries' array");
    std::vector<bool> seen(1440, false);
    for (const auto& entry : doc["entries"]) {
        if (!entry.is_object()) fail(ErrorKind::MalformedDocument, "entry must be an object");
        std::int64_t minute = require_int(entry, "m");
        std::int64_t steps = require_int(entry, "steps");
        if (minute < 0 || minute > 1439)
            fail(ErrorKind::InvalidValue, "minute index " + std::to_string(minute) + " outside 0..1439");
        if (steps < 0) fail(ErrorKind::InvalidValue, "negative steps at minute " + std::to_string(minute));
        if (seen[static_cast<std::size_t>(minute)])
            fail(ErrorKind::DuplicateMinute, "minute " + std::to_string(minute) + " appears twice");
        seen[static_cast<std::size_t>(minute)] = true;
        series.steps_per_minute[static_cast<std::size_t>(minute)] = static_cast<std::uint32_t>(steps);
    }
    return series;
}

StorylineDay parse_moves_day(const std::string& document) {
    json doc = parse_json(document);
    if (require_string(doc, "source") != "storyline")
        fail(ErrorKind::MalformedDocument, "source must be 'storyline'");
    StorylineDay day;
    day.user_id = require_string(doc, "user");
    day.date = require_date(doc, "date");

    if (!doc.contains("segments") || !doc["segments"].is_array())
        fail(ErrorKind::MalformedDocument, "missing 'segments' array");
    for (const auto& seg_json : doc["segments"]) {
        if (!seg_json.is_object()) fail(ErrorKind::MalformedDocument, "segment must be an object");
        Segment seg;
        seg.user_id = day.user_id;
        seg.date = day.date;
        std::string kind = require_string(seg_json, "kind");
        if (kind == "location") {
            seg.kind = SegmentKind::Location;
        } else if (kind == "transition") {
            seg.kind = SegmentKind::Transition;
        } else {
            fail(ErrorKind::MalformedDocument, "unknown segment kind '" + kind + "'");
        }
        seg.start = require_time(seg_json, "start");
        seg.end = require_time(seg_json, "end");
        if (seg.end <= seg.start)
            fail(ErrorKind::InvalidValue, "segment end " + timeofday::format(seg.end) +
                                              " not after start " + timeofday::format(seg.start));
        std::int64_t steps = require_int(seg_json, "steps");
        if (steps < 0) fail(ErrorKind::InvalidValue, "negative steps in segment");
        seg.steps = static_cast<std::uint32_t>(steps);
        if (seg_json.contains("place")) {
            if (seg.kind != SegmentKind::Location)
                fail(ErrorKind::MalformedDocument, "place on a transition segment");
            const auto& place = seg_json["place"];
            if (!place.is_object()) fail(ErrorKind::MalformedDocument, "'place' must be an object");
            if (place.contains("name")) seg.place_name = require_string(place, "name");
            if (place.contains("type")) seg.place_type = require_string(place, "type");
        }
        day.segments.push_back(std::move(seg));
    }

    std::sort(day.segments.begin(), day.segments.end(),
              [](const Segment& a, const Segment& b) { return a.start < b.start; });
    for (std::size_t i = 1; i < day.segments.size(); ++i) {
        const auto& prev = day.segments[i - 1];
        const auto& cur = day.segments[i];
        if (prev.end > cur.start)
            fail(ErrorKind::OverlappingSegments,
                 "segments [" + timeofday::format(prev.start) + ", " + timeofday::format(prev.end) +
                     ") and [" + timeofday::format(cur.start) + ", " + timeofday::format(cur.end) +
                     ") intersect");
    }
    return day;
}

UserProfile parse_profile(const std::string& document) {
    json doc = parse_json(document);
    UserProfile profile;
    profile.user_id = require_string(doc, "user");
    if (doc.contains("goal") && !doc["goal"].is_null()) {
        std::int64_t goal = require_int(doc, "goal");
        if (goal <= 0) fail(ErrorKind::InvalidValue, "step goal must be positive");
        profile.step_goal = static_cast<std::uint32_t>(goal);
    }
    if (doc.contains("gender") && !doc["gender"].is_null())
        profile.gender = require_string(doc, "gender");
    if (doc.contains("age") && !doc["age"].is_null()) {
        std::int64_t age = require_int(doc, "age");
        if (age <= 0) fail(ErrorKind::InvalidValue, "age must be positive");
        profile.age = static_cast<std::uint32_t>(age);
    }
    if (doc.contains("motivation") && !doc["motivation"].is_null())
        profile.motivation = require_string(doc, "motivation");
    return profile;
}

RawDay parse_day(const std::string& document) {
    json doc = parse_json(document);
    std::string source = require_string(doc, "source");
    if (source == "pedometer") return parse_fitbit_day(document);
    if (source == "storyline") return parse_moves_day(document);
    fail(ErrorKind::MalformedDocument, "unknown source '" + source + "'");
}

std::string serialize(const MinuteSeries& series) {
    json doc;
    doc["user"] = series.user_id;
    doc["date"] = series.date.to_string();
    doc["source"] = "pedometer";
    json entries = json::array();
    for (std::size_t m = 0; m < series.steps_per_minute.size(); ++m) {
        if (series.steps_per_minute[m] == 0) continue;  // sparse: missing minutes are zero
        entries.push_back({{"m", m}, {"steps", series.steps_per_minute[m]}});
    }
    doc["entries"] = std::move(entries);
    return doc.dump();
}

std::string serialize(const StorylineDay& day) {
    json doc;
    doc["user"] = day.user_id;
    doc["date"] = day.date.to_string();
    doc["source"] = "storyline";
    json segments = json::array();
    for (const auto& seg : day.segments) {
        json s;
        s["kind"] = seg.kind == SegmentKind::Location ? "location" : "transition";
        s["start"] = timeofday::format(seg.start);
        s["end"] = timeofday::format(seg.end);
        s["steps"] = seg.steps;
        if (seg.place_name || seg.place_type) {
            json place;
            if (seg.place_name) place["name"] = *seg.place_name;
            if (seg.place_type) place["type"] = *seg.place_type;
            s["place"] = std::move(place);
        }
        segments.push_back(std::move(s));
    }
    doc["segments"] = std::move(segments);
    return doc.dump();
}

std::string serialize(const UserProfile& profile) {
    json doc;
    doc["user"] = profile.user_id;
    if (profile.step_goal) doc["goal"] = *profile.step_goal;
    if (profile.gender) doc["gender"] = *profile.gender;
    if (profile.age) doc["age"] = *profile.age;
    if (profile.motivation) doc["motivation"] = *profile.motivation;
    return doc.dump();
}

std::string serialize(const RawDay& day) {
    return std::visit([](const auto& d) { return serialize(d); }, day);
}

void write_file_atomic(const std::filesystem::path& path, const std::string& content) {
    std::error_code ec;
    std::filesystem::create_directories(path.parent_path(), ec);
    auto tmp = path;
    tmp += ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) fail(ErrorKind::IoFailure, "cannot open " + tmp.string() + " for writing");
        out << content;
        if (!out.good()) fail(ErrorKind::IoFailure, "short write to " + tmp.string());
    }
    std::filesystem::rename(tmp, path, ec);
    if (ec) fail(ErrorKind::IoFailure, "rename to " + path.string() + " failed: " + ec.message());
}

std::string read_file(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) fail(ErrorKind::IoFailure, "cannot open " + path.string());
    std::string content((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
    return content;
}

Store::Store(std::filesystem::path root) : root_(std::move(root)) {
    std::error_code ec;
    std::filesystem::create_directories(root_ / "days", ec);
    std::filesystem::create_directories(root_ / "profiles", ec);
    if (ec) fail(ErrorKind::IoFailure, "cannot create store at " + root_.string());
}

std::filesystem::path Store::day_path(const std::string& user, const Date& date) const {
    return root_ / "days" / user / (date.to_string() + ".json");
}

std::filesystem::path Store::profile_path(const std::string& user) const {
    return root_ / "profiles" / (user + ".json");
}

std::size_t Store::store_days(const std::vector<RawDay>& records, bool overwrite) {
    // One document per (user, date); the document's own "source" field is the
    // third key component, so a day can only be replaced by a different source
    // (or different content) with the overwrite flag.
    // Check the whole batch for conflicts before touching the store so a
    // rejected batch leaves it unchanged.
    std::map<std::string, std::string> plan;
    for (const auto& record : records) {
        auto path = day_path(raw_day_user(record), raw_day_date(record));
        std::string content = serialize(record);
        if (!overwrite && std::filesystem::exists(path)) {
            std::string existing = read_file(path);
            if (existing != content)
                fail(ErrorKind::ConflictingDuplicate,
                     "store already holds different content for " + raw_day_user(record) + "/" +
                         raw_day_date(record).to_string());
        }
        auto [slot, inserted] = plan.emplace(path.string(), content);
        if (!inserted && slot->second != content)
            fail(ErrorKind::ConflictingDuplicate,
                 "batch holds conflicting records for " + raw_day_user(record) + "/" +
                     raw_day_date(record).to_string());
    }
    for (const auto& [path, content] : plan)
        write_file_atomic(std::filesystem::path(path), content);
    rewrite_index();
    return plan.size();
}

void Store::store_profile(const UserProfile& profile, bool overwrite) {
    auto path = profile_path(profile.user_id);
    std::string content = serialize(profile);
    if (std::filesystem::exists(path) && !overwrite) {
        std::string existing = read_file(path);
        if (existing != content)
            fail(ErrorKind::ConflictingDuplicate,
                 "store already holds a different profile for " + profile.user_id);
    }
    write_file_atomic(path, content);
    rewrite_index();
}

std::vector<RawDay> Store::load_days() const { return load_days(std::string()); }

std::vector<RawDay> Store::load_days(const std::string& user_id) const {
    std::vector<RawDay> days;
    auto days_dir = root_ / "days";
    if (!std::filesystem::exists(days_dir)) return days;
    std::vector<std::filesystem::path> files;
    for (const auto& user_dir : std::filesystem::directory_iterator(days_dir)) {
        if (!user_dir.is_directory()) continue;
        if (!user_id.empty() && user_dir.path().filename() != user_id) continue;
        for (const auto& file : std::filesystem::directory_iterator(user_dir.path())) {
            if (file.path().extension() == ".json") files.push_back(file.path());
        }
    }
    std::sort(files.begin(), files.end());
    days.reserve(files.size());
    for (const auto& file : files) days.push_back(parse_day(read_file(file)));
    return days;
}

std::map<std::string, UserProfile> Store::load_profiles() const {
    std::map<std::string, UserProfile> profiles;
    auto dir = root_ / "profiles";
    if (!std::filesystem::exists(dir)) return profiles;
    for (const auto& file : std::filesystem::directory_iterator(dir)) {
        if (file.path().extension() != ".json") continue;
        auto profile = parse_profile(read_file(file.path()));
        profiles.emplace(profile.user_id, std::move(profile));
    }
    return profiles;
}

std::vector<Store::IndexEntry> Store::read_index() const {
    auto path = root_ / "index.json";
    std::vector<IndexEntry> entries;
    if (!std::filesystem::exists(path)) return entries;
    json doc = json::parse(read_file(path), nullptr, false);
    if (doc.is_discarded()) fail(ErrorKind::MalformedDocument, "corrupt index.json");
    for (const auto& e : doc["days"]) {
        entries.push_back({e["user"].get<std::string>(), e["date"].get<std::string>(),
                           e["source"].get<std::string>()});
    }
    return entries;
}

void Store::rewrite_index() const {
    json index;
    json days = json::array();
    auto days_dir = root_ / "days";
    std::vector<std::filesystem::path> files;
    if (std::filesystem::exists(days_dir)) {
        for (const auto& user_dir : std::filesystem::directory_iterator(days_dir)) {
            if (!user_dir.is_directory()) continue;
            for (const auto& file : std::filesystem::directory_iterator(user_dir.path())) {
                if (file.path().extension() == ".json") files.push_back(file.path());
            }
        }
    }
    std::sort(files.begin(), files.end());
    for (const auto& file : files) {
        json doc = json::parse(read_file(file), nullptr, false);
        if (doc.is_discarded()) continue;
        days.push_back({{"user", doc["user"]}, {"date", doc["date"]}, {"source", doc["source"]}});
    }
    index["days"] = std::move(days);

    json profiles = json::array();
    auto prof_dir = root_ / "profiles";
    std::vector<std::string> users;
    if (std::filesystem::exists(prof_dir)) {
        for (const auto& file : std::filesystem::directory_iterator(prof_dir)) {
            if (file.path().extension() == ".json") users.push_back(file.path().stem().string());
        }
    }
    std::sort(users.begin(), users.end());
    for (const auto& u : users) profiles.push_back(u);
    index["profiles"] = std::move(profiles);

    write_file_atomic(root_ / "index.json", index.dump(2) + "\n");
}

}  // namespace stepcast::ingest
