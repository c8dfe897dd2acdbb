#include "stepcast/core.hpp"

#include <charconv>
#include <cmath>
#include <cstdio>
#include <cstdlib>

namespace stepcast {

const char* to_string(ErrorKind kind) {
    switch (kind) {
        case ErrorKind::MalformedDocument: return "MalformedDocument";
        case ErrorKind::InvalidValue: return "InvalidValue";
        case ErrorKind::DuplicateMinute: return "DuplicateMinute";
        case ErrorKind::OverlappingSegments: return "OverlappingSegments";
        case ErrorKind::IoFailure: return "IoFailure";
        case ErrorKind::ConflictingDuplicate: return "ConflictingDuplicate";
        case ErrorKind::MalformedFixture: return "MalformedFixture";
        case ErrorKind::TooFewRows: return "TooFewRows";
        case ErrorKind::DimensionMismatch: return "DimensionMismatch";
        case ErrorKind::EmptyInput: return "EmptyInput";
        case ErrorKind::ConstantTarget: return "ConstantTarget";
        case ErrorKind::DegenerateInput: return "DegenerateInput";
        case ErrorKind::SingleClass: return "SingleClass";
        case ErrorKind::NonBinaryLabels: return "NonBinaryLabels";
        case ErrorKind::EmptyClass: return "EmptyClass";
        case ErrorKind::ZeroVector: return "ZeroVector";
        case ErrorKind::UnsupportedKernel: return "UnsupportedKernel";
        case ErrorKind::InvalidSpec: return "InvalidSpec";
        case ErrorKind::NoData: return "NoData";
    }
    return "UnknownError";
}

namespace {

constexpr int kDaysInMonth[] = {31, 28, 31, 30, 31, 30, 31, 31, 30, 31, 30, 31};

bool is_leap(int y) { return (y % 4 == 0 && y % 100 != 0) || y % 400 == 0; }

int days_in_month(int y, int m) {
    if (m == 2 && is_leap(y)) return 29;
    return kDaysInMonth[m - 1];
}

}  // namespace

bool Date::valid() const {
    return month >= 1 && month <= 12 && day >= 1 && day <= days_in_month(year, month);
}

// Howard Hinnant's days-from-civil algorithm.
std::int64_t Date::day_number() const {
    const int y = year - (month <= 2);
    const int era = (y >= 0 ? y : y - 399) / 400;
    const unsigned yoe = static_cast<unsigned>(y - era * 400);
    const unsigned doy = (153u * (month + (month > 2 ? -3 : 9)) + 2) / 5 + day - 1;
    const unsigned doe = yoe * 365 + yoe / 4 - yoe / 100 + doy;
    return static_cast<std::int64_t>(era) * 146097 + static_cast<std::int64_t>(doe) - 719468;
}

Date Date::from_day_number(std::int64_t dn) {
    std::int64_t z = dn + 719468;
    const std::int64_t era = (z >= 0 ? z : z - 146096) / 146097;
    const unsigned doe = static_cast<unsigned>(z - era * 146097);
    const unsigned yoe = (doe - doe / 1460 + doe / 36524 - doe / 146096) / 365;
    const std::int64_t y = static_cast<std::int64_t>(yoe) + era * 400;
    const unsigned doy = doe - (365 * yoe + yoe / 4 - yoe / 100);
    const unsigned mp = (5 * doy + 2) / 153;
    const unsigned d = doy - (153 * mp + 2) / 5 + 1;
    const unsigned m = mp + (mp < 10 ? 3 : -9);
    return Date{static_cast<int>(y + (m <= 2)), static_cast<int>(m), static_cast<int>(d)};
}

int Date::weekday() const {
    // 1970-01-01 was a Thursday (4).
    std::int64_t dn = day_number();
    return static_cast<int>(((dn + 3) % 7 + 7) % 7) + 1;
}

std::string Date::to_string() const {
    char buf[16];
    std::snprintf(buf, sizeof(buf), "%04d-%02d-%02d", year, month, day);
    return buf;
}

std::optional<Date> Date::parse(const std::string& text) {
    if (text.size() != 10 || text[4] != '-' || text[7] != '-') return std::nullopt;
    for (std::size_t i = 0; i < text.size(); ++i) {
        if (i == 4 || i == 7) continue;
        if (text[i] < '0' || text[i] > '9') return std::nullopt;
    }
    Date d;
    d.year = std::stoi(text.substr(0, 4));
    d.month = std::stoi(text.substr(5, 2));
    d.day = std::stoi(text.substr(8, 2));
    if (!d.valid()) return std::nullopt;
    return d;
}

namespace timeofday {

std::optional<int> parse(const std::string& text) {
    if (text.size() != 8 || text[2] != ':' || text[5] != ':') return std::nullopt;
    for (std::size_t i = 0; i < text.size(); ++i) {
        if (i == 2 || i == 5) continue;
        if (text[i] < '0' || text[i] > '9') return std::nullopt;
    }
    int h = std::stoi(text.substr(0, 2));
    int m = std::stoi(text.substr(3, 2));
    int s = std::stoi(text.substr(6, 2));
    if (h > 24 || m > 59 || s > 59) return std::nullopt;
    int total = h * 3600 + m * 60 + s;
    if (total > kSecondsPerDay) return std::nullopt;  // only exactly 24:00:00 past 23:59:59
    return total;
}

std::string format(int seconds) {
    char buf[16];
    std::snprintf(buf, sizeof(buf), "%02d:%02d:%02d", seconds / 3600, (seconds / 60) % 60,
                  seconds % 60);
    return buf;
}

}  // namespace timeofday

std::int64_t Rng::int_range(std::int64_t lo, std::int64_t hi) {
    // Multiply-shift mapping; bias is < 2^-64 * span, irrelevant here.
    auto span = static_cast<std::uint64_t>(hi - lo) + 1;
    auto x = next_u64();
    auto product = static_cast<unsigned __int128>(x) * static_cast<unsigned __int128>(span);
    return lo + static_cast<std::int64_t>(product >> 64);
}

double Rng::normal() {
    double u1 = uniform();
    double u2 = uniform();
    while (u1 <= 0.0) u1 = uniform();
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * 3.14159265358979323846 * u2);
}

double Rng::lognormal(double mu, double sigma) { return std::exp(normal(mu, sigma)); }

std::uint64_t mix_seed(std::uint64_t seed, std::uint64_t stream) {
    std::uint64_t z = seed + 0x9E3779B97F4A7C15ull * (stream + 1);
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
    return z ^ (z >> 31);
}

double dot(std::span<const double> a, std::span<const double> b) {
    double s = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
    return s;
}

std::string format_double(double value) {
    char buf[64];
    auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), value);
    (void)ec;
    return std::string(buf, ptr);
}

std::string double_to_hex(double value) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%a", value);
    return buf;
}

double double_from_hex(const std::string& text) {
    char* end = nullptr;
    double v = std::strtod(text.c_str(), &end);
    if (end == text.c_str()) fail(ErrorKind::MalformedDocument, "bad hex float: " + text);
    return v;
}

}  // namespace stepcast
