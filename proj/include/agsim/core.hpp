#ifndef AGSIM_CORE_HPP
#define AGSIM_CORE_HPP

#include <cmath>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace agsim {

using Tick = std::int64_t;
using HostId = std::string;
using ServiceId = std::string;
using SubnetId = std::string;
using StateId = int;
using ActionId = int;

// NONE < USER < ROOT
enum class PrivilegeLevel : int { None = 0, User = 1, Root = 2 };

inline const char* to_string(PrivilegeLevel p) {
    switch (p) {
        case PrivilegeLevel::None: return "none";
        case PrivilegeLevel::User: return "user";
        case PrivilegeLevel::Root: return "root";
    }
    return "?";
}

inline PrivilegeLevel privilege_from_string(const std::string& s) {
    if (s == "none") return PrivilegeLevel::None;
    if (s == "user") return PrivilegeLevel::User;
    if (s == "root") return PrivilegeLevel::Root;
    throw std::invalid_argument("unknown privilege level: " + s);
}

enum class Layer { Generic, Terrain, Adversary, Task };

inline const char* to_string(Layer l) {
    switch (l) {
        case Layer::Generic: return "generic";
        case Layer::Terrain: return "terrain";
        case Layer::Adversary: return "adversary";
        case Layer::Task: return "task";
    }
    return "?";
}

// ---------------------------------------------------------------------------
// Errors
// ---------------------------------------------------------------------------

struct Error : std::runtime_error {
    explicit Error(const std::string& msg) : std::runtime_error(msg) {}
};

struct InvalidEventError : Error { using Error::Error; };
struct StateSpaceCapError : Error { using Error::Error; };
struct EmptyGraphError : Error { using Error::Error; };
struct LayerOrderError : Error { using Error::Error; };
struct EmptyActionSetError : Error { using Error::Error; };
struct TargetMissingError : Error { using Error::Error; };
struct OracleScaleExceededError : Error { using Error::Error; };
struct ScenarioInvalidError : Error { using Error::Error; };

// ---------------------------------------------------------------------------
// Seeded RNG
//
// Thin wrapper over a fixed xorshift-style generator so results do not
// depend on the standard library's distribution implementations.
// ---------------------------------------------------------------------------

class Rng {
public:
    explicit Rng(std::uint64_t seed) : state_(seed ? seed : 0x9e3779b97f4a7c15ULL) {
        // warm up so nearby seeds decorrelate
        for (int i = 0; i < 4; ++i) next_u64();
    }

    std::uint64_t next_u64() {
        // splitmix64
        std::uint64_t z = (state_ += 0x9e3779b97f4a7c15ULL);
        z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
        z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
        return z ^ (z >> 31);
    }

    // uniform in [0, 1)
    double next_double() {
        return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
    }

    // uniform integer in [0, n)
    std::uint64_t next_below(std::uint64_t n) {
        return n == 0 ? 0 : next_u64() % n;
    }

    // exponential inter-arrival time with the given rate
    double next_exponential(double rate) {
        double u = next_double();
        return -std::log1p(-u) / rate;
    }

private:
    std::uint64_t state_;
};

// ---------------------------------------------------------------------------
// FNV-1a hashing, used for content hashes in manifests and diff checks
// ---------------------------------------------------------------------------

inline std::uint64_t fnv1a_init() { return 1469598103934665603ULL; }

inline std::uint64_t fnv1a(std::uint64_t h, const void* data, std::size_t len) {
    const auto* p = static_cast<const unsigned char*>(data);
    for (std::size_t i = 0; i < len; ++i) {
        h ^= p[i];
        h *= 1099511628211ULL;
    }
    return h;
}

inline std::uint64_t fnv1a(std::uint64_t h, const std::string& s) {
    return fnv1a(h, s.data(), s.size());
}

inline std::string hex64(std::uint64_t v) {
    static const char* digits = "0123456789abcdef";
    std::string out(16, '0');
    for (int i = 15; i >= 0; --i) {
        out[static_cast<std::size_t>(i)] = digits[v & 0xF];
        v >>= 4;
    }
    return out;
}

// ---------------------------------------------------------------------------
// Probability helpers
// ---------------------------------------------------------------------------

// Returns (p, 1-p) adjusted so the pair sums to exactly 1.0. One of the two
// values is >= 0.5, so the subtraction from 1 on that side is exact and the
// partner is recomputed from it.
inline std::pair<double, double> exact_complement(double p) {
    if (p <= 0.0) return {0.0, 1.0};
    if (p >= 1.0) return {1.0, 0.0};
    if (p >= 0.5) {
        double q = 1.0 - p;  // exact
        return {p, q};
    }
    double q = 1.0 - p;      // rounds; q >= 0.5
    double p2 = 1.0 - q;     // exact
    return {p2, q};
}

inline double clamp(double v, double lo, double hi) {
    return v < lo ? lo : (v > hi ? hi : v);
}

}  // namespace agsim

#endif  // AGSIM_CORE_HPP
