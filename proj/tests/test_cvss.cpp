#include "catch2/catch_amalgamated.hpp"

#include "agsim/cvss.hpp"

using namespace agsim;

namespace {

// Independent reimplementation of the published coefficient tables, kept
// deliberately separate from the library path it checks.
double oracle_exploitability(const CvssVector& v) {
    double av[] = {0.85, 0.62, 0.55, 0.2};
    double ac[] = {0.77, 0.44};
    double ui[] = {0.85, 0.62};
    double pr;
    switch (v.privileges_required) {
        case PrivilegesRequired::None: pr = 0.85; break;
        case PrivilegesRequired::Low: pr = v.scope == Scope::Changed ? 0.68 : 0.62; break;
        default: pr = v.scope == Scope::Changed ? 0.5 : 0.27; break;
    }
    return 8.22 * av[static_cast<int>(v.attack_vector)] *
           ac[static_cast<int>(v.attack_complexity)] * pr *
           ui[static_cast<int>(v.user_interaction)];
}

double oracle_impact(const CvssVector& v) {
    auto w = [](ImpactMetric m) {
        return m == ImpactMetric::None ? 0.0 : (m == ImpactMetric::Low ? 0.22 : 0.56);
    };
    double iss = 1.0 - (1.0 - w(v.confidentiality)) * (1.0 - w(v.integrity)) *
                           (1.0 - w(v.availability));
    if (v.scope == Scope::Unchanged) return 6.42 * iss;
    double raw = 7.52 * (iss - 0.029) - 3.25 * std::pow(iss - 0.02, 15.0);
    return raw < 0.0 ? 0.0 : raw;
}

}  // namespace

TEST_CASE("vector string parsing round-trips") {
    std::string s = "AV:A/AC:H/PR:L/UI:R/S:C/C:L/I:H/A:N";
    CvssVector v = parse_cvss(s);
    CHECK(format_cvss(v) == s);
    CHECK(parse_cvss("CVSS:3.1/" + s) == v);
}

TEST_CASE("parsing rejects malformed vectors") {
    CHECK_THROWS_AS(parse_cvss("AV:N/AC:L/PR:N/UI:N/S:U/C:H/I:H"), std::invalid_argument);
    CHECK_THROWS_AS(parse_cvss("AV:X/AC:L/PR:N/UI:N/S:U/C:H/I:H/A:H"),
                    std::invalid_argument);
    CHECK_THROWS_AS(parse_cvss("AV:N/AC:L/PR:N/UI:N/S:U/C:H/I:H/A:H/XX:Y"),
                    std::invalid_argument);
}

TEST_CASE("network/low/none vector scores 3.887") {
    CvssVector v = parse_cvss("AV:N/AC:L/PR:N/UI:N/S:U/C:H/I:H/A:H");
    CHECK_THAT(exploitability_score(v), Catch::Matchers::WithinAbs(3.887, 5e-4));
    CHECK_THAT(exploitability_score(v),
               Catch::Matchers::WithinAbs(oracle_exploitability(v), 1e-12));
}

TEST_CASE("full impact, scope unchanged, scores 5.873") {
    CvssVector v = parse_cvss("AV:N/AC:L/PR:N/UI:N/S:U/C:H/I:H/A:H");
    CHECK_THAT(impact_score(v), Catch::Matchers::WithinAbs(5.873, 5e-4));
    CHECK_THAT(impact_score(v), Catch::Matchers::WithinAbs(oracle_impact(v), 1e-12));
}

TEST_CASE("no impact metrics give zero impact") {
    CvssVector v = parse_cvss("AV:N/AC:L/PR:N/UI:N/S:U/C:N/I:N/A:N");
    CHECK(impact_score(v) == 0.0);
    v.scope = Scope::Changed;
    CHECK(impact_score(v) == 0.0);  // negative closed form clamps to zero
}

TEST_CASE("hardest vector is the minimum nonzero exploitability") {
    CvssVector hardest = parse_cvss("AV:P/AC:H/PR:H/UI:R/S:U/C:N/I:N/A:N");
    double min_seen = 1e9;
    for (const auto& v : all_cvss_vectors()) {
        double e = exploitability_score(v);
        if (e > 0.0) min_seen = std::min(min_seen, e);
    }
    CHECK_THAT(exploitability_score(hardest), Catch::Matchers::WithinAbs(min_seen, 1e-12));
    CHECK_THAT(min_seen, Catch::Matchers::WithinAbs(8.22 * 0.2 * 0.44 * 0.27 * 0.62, 1e-12));
}

TEST_CASE("exhaustive bounds over every base vector") {
    auto all = all_cvss_vectors();
    CHECK(all.size() == 4u * 2u * 3u * 2u * 2u * 3u * 3u * 3u);
    for (const auto& v : all) {
        double e = exploitability_score(v);
        double i = impact_score(v);
        CHECK(e >= 0.0);
        CHECK(e <= 3.9);
        CHECK(i >= 0.0);
        CHECK(i <= 6.1);
        CHECK_THAT(e, Catch::Matchers::WithinAbs(oracle_exploitability(v), 1e-12));
        CHECK_THAT(i, Catch::Matchers::WithinAbs(oracle_impact(v), 1e-12));
    }
}

TEST_CASE("exploitability is monotone in AC, PR and UI hardness") {
    for (const auto& v : all_cvss_vectors()) {
        CvssVector harder = v;
        harder.attack_complexity = AttackComplexity::High;
        CvssVector easier = v;
        easier.attack_complexity = AttackComplexity::Low;
        CHECK(exploitability_score(easier) >= exploitability_score(harder));

        harder = v;
        harder.privileges_required = PrivilegesRequired::High;
        easier = v;
        easier.privileges_required = PrivilegesRequired::None;
        CHECK(exploitability_score(easier) >= exploitability_score(harder));

        harder = v;
        harder.user_interaction = UserInteraction::Required;
        easier = v;
        easier.user_interaction = UserInteraction::None;
        CHECK(exploitability_score(easier) >= exploitability_score(harder));
    }
}

TEST_CASE("raising any impact metric never lowers the impact score") {
    for (const auto& v : all_cvss_vectors()) {
        CvssVector raised = v;
        raised.confidentiality = ImpactMetric::High;
        CHECK(impact_score(raised) >= impact_score(v) - 1e-12);
        raised = v;
        raised.integrity = ImpactMetric::High;
        CHECK(impact_score(raised) >= impact_score(v) - 1e-12);
        raised = v;
        raised.availability = ImpactMetric::High;
        CHECK(impact_score(raised) >= impact_score(v) - 1e-12);
    }
}
