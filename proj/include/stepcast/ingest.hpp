#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "stepcast/core.hpp"

namespace stepcast::ingest {

/// One day of minute-resolution pedometer readings. Minutes absent from the
/// source document are zero (a non-reporting tracker counts no steps).
struct MinuteSeries {
    std::string user_id;
    Date date;
    std::vector<std::uint32_t> steps_per_minute;  // exactly 1440 entries

    std::uint64_t total_steps() const;
    bool operator==(const MinuteSeries&) const = default;
};

enum class SegmentKind { Location, Transition };

/// A contiguous interval in which the user is either at one place or moving
/// between places. Times are seconds since midnight, end-exclusive; segments
/// never cross midnight.
struct Segment {
    std::string user_id;
    Date date;
    SegmentKind kind = SegmentKind::Transition;
    int start = 0;
    int end = 0;
    std::uint32_t steps = 0;
    std::optional<std::string> place_name;
    std::optional<std::string> place_type;

    bool operator==(const Segment&) const = default;
};

/// A day of storyline segments, sorted by start time, non-overlapping. Gaps
/// are permitted; no synthetic fill.
struct StorylineDay {
    std::string user_id;
    Date date;
    std::vector<Segment> segments;

    std::uint64_t total_steps() const;
    bool operator==(const StorylineDay&) const = default;
};

struct UserProfile {
    std::string user_id;
    std::optional<std::uint32_t> step_goal;
    std::optional<std::string> gender;
    std::optional<std::uint32_t> age;
    std::optional<std::string> motivation;

    bool operator==(const UserProfile&) const = default;
};

using RawDay = std::variant<MinuteSeries, StorylineDay>;

const std::string& raw_day_user(const RawDay& day);
Date raw_day_date(const RawDay& day);
const char* raw_day_source(const RawDay& day);  // "pedometer" | "storyline"

/// Parse one canonical minute-log JSON document.
MinuteSeries parse_fitbit_day(const std::string& document);

/// Parse one canonical storyline JSON document. Segments come back sorted by
/// start time and validated as non-overlapping.
StorylineDay parse_moves_day(const std::string& document);

UserProfile parse_profile(const std::string& document);

/// Parse either day format, dispatching on the document's "source" field.
RawDay parse_day(const std::string& document);

std::string serialize(const MinuteSeries& series);
std::string serialize(const StorylineDay& day);
std::string serialize(const UserProfile& profile);
std::string serialize(const RawDay& day);

/// Directory-backed canonical store:
///   <root>/days/<user>/<date>.json
///   <root>/profiles/<user>.json
///   <root>/index.json
///
/// Writes are serialized by the caller owning the Store object; parsers are
/// pure and may run on any thread.
class Store {
public:
    explicit Store(std::filesystem::path root);

    const std::filesystem::path& root() const { return root_; }

    /// Idempotent upsert keyed by (user_id, date, source). Returns the number
    /// of day records written. Identical re-stores succeed; a key collision
    /// with different content fails with ConflictingDuplicate unless
    /// `overwrite` is set.
    std::size_t store_days(const std::vector<RawDay>& records, bool overwrite = false);

    void store_profile(const UserProfile& profile, bool overwrite = false);

    std::vector<RawDay> load_days() const;
    std::vector<RawDay> load_days(const std::string& user_id) const;
    std::map<std::string, UserProfile> load_profiles() const;

    struct IndexEntry {
        std::string user_id;
        std::string date;
        std::string source;
        bool operator==(const IndexEntry&) const = default;
        auto operator<=>(const IndexEntry&) const = default;
    };
    std::vector<IndexEntry> read_index() const;

private:
    std::filesystem::path root_;
    std::filesystem::path day_path(const std::string& user, const Date& date) const;
    std::filesystem::path profile_path(const std::string& user) const;
    void rewrite_index() const;
};

/// Atomic file write (temp + rename); used for every store and report file.
void write_file_atomic(const std::filesystem::path& path, const std::string& content);
std::string read_file(const std::filesystem::path& path);

}  // namespace stepcast::ingest
