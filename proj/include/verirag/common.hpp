#pragma once

/// \file common.hpp
/// Shared enums, error types and small utilities used across the library.

#include <cstdint>
#include <random>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace verirag {

// ---------------------------------------------------------------------------
// Core enums
// ---------------------------------------------------------------------------

enum class DatasetKind { bioasq, pubmedqa };

/// Final answer label. `maybe` is only valid for pubmedqa; `abstain` is the
/// "ANSWER UNAVAILABLE" outcome.
enum class AnswerLabel { yes, no, maybe, abstain };

enum class SelectionPolicy { similarity_only, label_balanced, static_pool };

std::string to_string(DatasetKind kind);
std::string to_string(AnswerLabel label);
std::string to_string(SelectionPolicy policy);

DatasetKind dataset_kind_from_string(const std::string& s);
AnswerLabel answer_label_from_string(const std::string& s);
SelectionPolicy selection_policy_from_string(const std::string& s);

/// Valid gold/answer labels for a dataset (abstain excluded; it is an
/// outcome, not a gold label).
std::vector<AnswerLabel> label_space(DatasetKind kind);

// ---------------------------------------------------------------------------
// Errors
// ---------------------------------------------------------------------------

enum class ClientErrorKind { transport, protocol, rate_limited, invalid_response };

std::string to_string(ClientErrorKind kind);

/// Error raised by model clients. `rate_limited` implies retryable.
class ClientError : public std::runtime_error {
public:
    ClientError(ClientErrorKind kind, std::string detail, bool retryable)
        : std::runtime_error(to_string(kind) + ": " + detail),
          kind_(kind),
          detail_(std::move(detail)),
          retryable_(retryable || kind == ClientErrorKind::rate_limited) {}

    ClientErrorKind kind() const noexcept { return kind_; }
    const std::string& detail() const noexcept { return detail_; }
    bool retryable() const noexcept { return retryable_; }

private:
    ClientErrorKind kind_;
    std::string detail_;
    bool retryable_;
};

/// Error raised when an input file is malformed. Carries the offending
/// location so CLI messages can point at the line.
class DataError : public std::runtime_error {
public:
    DataError(std::string path, std::size_t line, const std::string& message)
        : std::runtime_error(path.empty()
                                 ? message
                                 : path + (line ? ":" + std::to_string(line) : "") + ": " + message),
          path_(std::move(path)),
          line_(line) {}

    explicit DataError(const std::string& message) : DataError("", 0, message) {}

    const std::string& path() const noexcept { return path_; }
    std::size_t line() const noexcept { return line_; }

private:
    std::string path_;
    std::size_t line_;
};

// ---------------------------------------------------------------------------
// Hashing / deterministic RNG
// ---------------------------------------------------------------------------

/// FNV-1a 64-bit. Used for request fingerprints and config fingerprints.
constexpr std::uint64_t fnv1a64(std::string_view data, std::uint64_t seed = 0xcbf29ce484222325ull) {
    std::uint64_t h = seed;
    for (unsigned char c : data) {
        h ^= c;
        h *= 0x100000001b3ull;
    }
    return h;
}

/// 16-hex-digit rendering of a 64-bit hash.
std::string to_hex(std::uint64_t value);

/// Derive a per-item seed from a run seed and an item key, so per-query
/// sampling does not depend on batch order.
inline std::uint64_t mix_seed(std::uint64_t seed, std::string_view key) {
    return fnv1a64(key, seed ^ 0x9e3779b97f4a7c15ull);
}

/// Uniform draw in [0, n) from a mt19937_64 using rejection sampling.
/// std::uniform_int_distribution is implementation-defined; this is not.
std::uint64_t bounded_uniform(std::mt19937_64& rng, std::uint64_t n);

// ---------------------------------------------------------------------------
// Small string helpers
// ---------------------------------------------------------------------------

std::string trim(std::string_view s);
std::string lower_ascii(std::string_view s);

}  // namespace verirag
