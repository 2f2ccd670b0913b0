#ifndef AGSIM_CVSS_HPP
#define AGSIM_CVSS_HPP

#include <array>
#include <sstream>
#include <string>
#include <vector>

#include "agsim/core.hpp"

namespace agsim {

// CVSS v3.1 base metrics. Only the eight base-score metrics are modeled;
// temporal and environmental metrics are out of scope.

enum class AttackVector { Network, Adjacent, Local, Physical };
enum class AttackComplexity { Low, High };
enum class PrivilegesRequired { None, Low, High };
enum class UserInteraction { None, Required };
enum class Scope { Unchanged, Changed };
enum class ImpactMetric { None, Low, High };

struct CvssVector {
    AttackVector attack_vector = AttackVector::Network;
    AttackComplexity attack_complexity = AttackComplexity::Low;
    PrivilegesRequired privileges_required = PrivilegesRequired::None;
    UserInteraction user_interaction = UserInteraction::None;
    Scope scope = Scope::Unchanged;
    ImpactMetric confidentiality = ImpactMetric::None;
    ImpactMetric integrity = ImpactMetric::None;
    ImpactMetric availability = ImpactMetric::None;

    bool operator==(const CvssVector&) const = default;
};

namespace detail {

inline double av_weight(AttackVector av) {
    switch (av) {
        case AttackVector::Network: return 0.85;
        case AttackVector::Adjacent: return 0.62;
        case AttackVector::Local: return 0.55;
        case AttackVector::Physical: return 0.2;
    }
    return 0.0;
}

inline double ac_weight(AttackComplexity ac) {
    return ac == AttackComplexity::Low ? 0.77 : 0.44;
}

// PR weight depends on scope
inline double pr_weight(PrivilegesRequired pr, Scope s) {
    switch (pr) {
        case PrivilegesRequired::None: return 0.85;
        case PrivilegesRequired::Low: return s == Scope::Changed ? 0.68 : 0.62;
        case PrivilegesRequired::High: return s == Scope::Changed ? 0.5 : 0.27;
    }
    return 0.0;
}

inline double ui_weight(UserInteraction ui) {
    return ui == UserInteraction::None ? 0.85 : 0.62;
}

inline double cia_weight(ImpactMetric m) {
    switch (m) {
        case ImpactMetric::None: return 0.0;
        case ImpactMetric::Low: return 0.22;
        case ImpactMetric::High: return 0.56;
    }
    return 0.0;
}

}  // namespace detail

// Exploitability subscore, 8.22 * AV * AC * PR * UI, in [0, 3.9].
inline double exploitability_score(const CvssVector& v) {
    return 8.22 * detail::av_weight(v.attack_vector) *
           detail::ac_weight(v.attack_complexity) *
           detail::pr_weight(v.privileges_required, v.scope) *
           detail::ui_weight(v.user_interaction);
}

// Impact subscore in [0, 6.1]. Scope-dependent closed form over the
// impact sub-score ISS = 1 - (1-C)(1-I)(1-A).
inline double impact_score(const CvssVector& v) {
    double iss = 1.0 - (1.0 - detail::cia_weight(v.confidentiality)) *
                           (1.0 - detail::cia_weight(v.integrity)) *
                           (1.0 - detail::cia_weight(v.availability));
    double raw;
    if (v.scope == Scope::Unchanged) {
        raw = 6.42 * iss;
    } else {
        raw = 7.52 * (iss - 0.029) - 3.25 * std::pow(iss - 0.02, 15.0);
    }
    return raw < 0.0 ? 0.0 : raw;
}

// ---------------------------------------------------------------------------
// Vector-string parsing: "AV:N/AC:L/PR:N/UI:N/S:U/C:H/I:H/A:H", with or
// without a leading "CVSS:3.1/" tag. All eight metrics are required.
// ---------------------------------------------------------------------------

inline CvssVector parse_cvss(const std::string& text) {
    std::string s = text;
    if (s.rfind("CVSS:3.1/", 0) == 0) s = s.substr(9);
    if (s.rfind("CVSS:3.0/", 0) == 0) s = s.substr(9);

    CvssVector v;
    std::array<bool, 8> seen{};
    std::stringstream ss(s);
    std::string part;
    while (std::getline(ss, part, '/')) {
        auto colon = part.find(':');
        if (colon == std::string::npos)
            throw std::invalid_argument("bad CVSS metric: " + part);
        std::string key = part.substr(0, colon);
        std::string val = part.substr(colon + 1);
        auto bad = [&]() -> std::invalid_argument {
            return std::invalid_argument("bad CVSS value " + key + ":" + val);
        };
        if (key == "AV") {
            seen[0] = true;
            if (val == "N") v.attack_vector = AttackVector::Network;
            else if (val == "A") v.attack_vector = AttackVector::Adjacent;
            else if (val == "L") v.attack_vector = AttackVector::Local;
            else if (val == "P") v.attack_vector = AttackVector::Physical;
            else throw bad();
        } else if (key == "AC") {
            seen[1] = true;
            if (val == "L") v.attack_complexity = AttackComplexity::Low;
            else if (val == "H") v.attack_complexity = AttackComplexity::High;
            else throw bad();
        } else if (key == "PR") {
            seen[2] = true;
            if (val == "N") v.privileges_required = PrivilegesRequired::None;
            else if (val == "L") v.privileges_required = PrivilegesRequired::Low;
            else if (val == "H") v.privileges_required = PrivilegesRequired::High;
            else throw bad();
        } else if (key == "UI") {
            seen[3] = true;
            if (val == "N") v.user_interaction = UserInteraction::None;
            else if (val == "R") v.user_interaction = UserInteraction::Required;
            else throw bad();
        } else if (key == "S") {
            seen[4] = true;
            if (val == "U") v.scope = Scope::Unchanged;
            else if (val == "C") v.scope = Scope::Changed;
            else throw bad();
        } else if (key == "C" || key == "I" || key == "A") {
            ImpactMetric m;
            if (val == "N") m = ImpactMetric::None;
            else if (val == "L") m = ImpactMetric::Low;
            else if (val == "H") m = ImpactMetric::High;
            else throw bad();
            if (key == "C") { v.confidentiality = m; seen[5] = true; }
            else if (key == "I") { v.integrity = m; seen[6] = true; }
            else { v.availability = m; seen[7] = true; }
        } else {
            throw std::invalid_argument("unknown CVSS metric: " + key);
        }
    }
    for (bool b : seen)
        if (!b) throw std::invalid_argument("incomplete CVSS vector: " + text);
    return v;
}

inline std::string format_cvss(const CvssVector& v) {
    auto av = [&] {
        switch (v.attack_vector) {
            case AttackVector::Network: return "N";
            case AttackVector::Adjacent: return "A";
            case AttackVector::Local: return "L";
            case AttackVector::Physical: return "P";
        }
        return "?";
    }();
    auto imp = [](ImpactMetric m) {
        return m == ImpactMetric::None ? "N" : (m == ImpactMetric::Low ? "L" : "H");
    };
    std::string out = "AV:";
    out += av;
    out += "/AC:";
    out += v.attack_complexity == AttackComplexity::Low ? "L" : "H";
    out += "/PR:";
    out += v.privileges_required == PrivilegesRequired::None
               ? "N"
               : (v.privileges_required == PrivilegesRequired::Low ? "L" : "H");
    out += "/UI:";
    out += v.user_interaction == UserInteraction::None ? "N" : "R";
    out += "/S:";
    out += v.scope == Scope::Unchanged ? "U" : "C";
    out += "/C:";
    out += imp(v.confidentiality);
    out += "/I:";
    out += imp(v.integrity);
    out += "/A:";
    out += imp(v.availability);
    return out;
}

// Attack-vector class tag used for adversary technique filtering.
inline std::string attack_vector_tag(AttackVector av) {
    switch (av) {
        case AttackVector::Network: return "network";
        case AttackVector::Adjacent: return "adjacent";
        case AttackVector::Local: return "local";
        case AttackVector::Physical: return "physical";
    }
    return "?";
}

// Enumerates all possible base vectors (for exhaustive bound sweeps).
inline std::vector<CvssVector> all_cvss_vectors() {
    std::vector<CvssVector> out;
    for (auto av : {AttackVector::Network, AttackVector::Adjacent,
                    AttackVector::Local, AttackVector::Physical})
        for (auto ac : {AttackComplexity::Low, AttackComplexity::High})
            for (auto pr : {PrivilegesRequired::None, PrivilegesRequired::Low,
                            PrivilegesRequired::High})
                for (auto ui : {UserInteraction::None, UserInteraction::Required})
                    for (auto s : {Scope::Unchanged, Scope::Changed})
                        for (auto c : {ImpactMetric::None, ImpactMetric::Low,
                                       ImpactMetric::High})
                            for (auto i : {ImpactMetric::None, ImpactMetric::Low,
                                           ImpactMetric::High})
                                for (auto a : {ImpactMetric::None, ImpactMetric::Low,
                                               ImpactMetric::High})
                                    out.push_back(CvssVector{av, ac, pr, ui, s, c, i, a});
    return out;
}

}  // namespace agsim

#endif  // AGSIM_CVSS_HPP
