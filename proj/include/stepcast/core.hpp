#pragma once

#include <cstdint>
#include <cstddef>
#include <optional>
#include <random>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace stepcast {

enum class ErrorKind {
    MalformedDocument,
    InvalidValue,
    DuplicateMinute,
    OverlappingSegments,
    IoFailure,
    ConflictingDuplicate,
    MalformedFixture,
    TooFewRows,
    DimensionMismatch,
    EmptyInput,
    ConstantTarget,
    DegenerateInput,
    SingleClass,
    NonBinaryLabels,
    EmptyClass,
    ZeroVector,
    UnsupportedKernel,
    InvalidSpec,
    NoData,
};

const char* to_string(ErrorKind kind);

/// All library failures are reported as Error with a machine-checkable kind.
class Error : public std::runtime_error {
public:
    Error(ErrorKind kind, const std::string& message)
        : std::runtime_error(std::string(to_string(kind)) + ": " + message), kind_(kind) {}

    ErrorKind kind() const noexcept { return kind_; }

private:
    ErrorKind kind_;
};

[[noreturn]] inline void fail(ErrorKind kind, const std::string& message) {
    throw Error(kind, message);
}

/// Proleptic Gregorian calendar date. Dates are local calendar days; no
/// timezone handling anywhere in the library.
struct Date {
    int year = 1970;
    int month = 1;
    int day = 1;

    auto operator<=>(const Date&) const = default;

    bool valid() const;

    /// Days since 1970-01-01 (negative before the epoch).
    std::int64_t day_number() const;
    static Date from_day_number(std::int64_t dn);

    Date next() const { return from_day_number(day_number() + 1); }
    Date prev() const { return from_day_number(day_number() - 1); }

    /// Monday = 1 .. Sunday = 7.
    int weekday() const;
    bool is_weekday() const { return weekday() <= 5; }

    std::string to_string() const;  // YYYY-MM-DD
    static std::optional<Date> parse(const std::string& text);
};

/// Time of day as seconds since midnight. 86400 ("24:00:00") is allowed as an
/// exclusive end-of-day bound; anything past it is rejected.
namespace timeofday {
constexpr int kSecondsPerDay = 86400;
std::optional<int> parse(const std::string& text);  // HH:MM:SS
std::string format(int seconds);
}  // namespace timeofday

/// Deterministic random source. Draws are defined in terms of mt19937_64
/// output words only (the engine's sequence is fixed by the standard; the
/// distribution mappings here are our own), so results are stable across
/// standard libraries. Every stochastic operation in the library takes an
/// explicit 64-bit seed; there is no global randomness.
class Rng {
public:
    explicit Rng(std::uint64_t seed) : engine_(seed) {}

    std::uint64_t next_u64() { return engine_(); }

    /// Uniform in [0, 1).
    double uniform() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }
    /// Uniform in [lo, hi).
    double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }
    /// Uniform integer in [lo, hi] inclusive.
    std::int64_t int_range(std::int64_t lo, std::int64_t hi);
    /// Standard normal via Box-Muller (two uniforms per draw, no cached spare).
    double normal();
    double normal(double mean, double stddev) { return mean + stddev * normal(); }
    double lognormal(double mu, double sigma);

    template <typename T>
    void shuffle(std::vector<T>& items) {
        for (std::size_t i = items.size(); i > 1; --i) {
            auto j = static_cast<std::size_t>(int_range(0, static_cast<std::int64_t>(i) - 1));
            std::swap(items[i - 1], items[j]);
        }
    }

private:
    std::mt19937_64 engine_;
};

/// Mix a base seed with a stream index (splitmix64 finalizer), used to derive
/// independent per-user / per-tree streams.
std::uint64_t mix_seed(std::uint64_t seed, std::uint64_t stream);

/// Dense row-major matrix of doubles; the only matrix type used by the
/// solvers.
struct Matrix {
    std::size_t rows = 0;
    std::size_t cols = 0;
    std::vector<double> data;

    Matrix() = default;
    Matrix(std::size_t r, std::size_t c, double fill = 0.0) : rows(r), cols(c), data(r * c, fill) {}

    double& at(std::size_t i, std::size_t j) { return data[i * cols + j]; }
    double at(std::size_t i, std::size_t j) const { return data[i * cols + j]; }

    std::span<double> row(std::size_t i) { return {data.data() + i * cols, cols}; }
    std::span<const double> row(std::size_t i) const { return {data.data() + i * cols, cols}; }
};

double dot(std::span<const double> a, std::span<const double> b);

/// Shortest decimal representation that round-trips to the same double.
std::string format_double(double value);

/// Lossless hex-float encoding used by the model serializers.
std::string double_to_hex(double value);
double double_from_hex(const std::string& text);

}  // namespace stepcast
