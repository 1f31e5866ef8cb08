#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <complex>
#include <functional>
#include <vector>

#include "ftoc/equilibria.hpp"

using namespace ftoc;

namespace {

ModelParams fixture_params() {
    ModelParams m;
    m.alpha = 0.9;
    m.c1 = 0.035;
    m.c2 = 2.3e-4;
    return m;
}

// Fixture engineered so the tumor-free point is asymptotically stable: a much
// stronger immune source overwhelms the tumor growth term, and the fat
// coupling is kept tiny so it cannot flip the tumor eigenvalue.
ModelParams stable_params() {
    ModelParams m = fixture_params();
    m.s = 8.1e7;
    m.c1 = 1e-12;
    m.c2 = 1e-12;
    return m;
}

double quartic_value(const CoexistingAnalysis& an, double x) {
    double v = 0.0;
    for (int i = 4; i >= 0; --i) v = v * x + an.m[i];
    return v;
}

double quartic_scale(const CoexistingAnalysis& an, double x) {
    double v = 0.0, p = 1.0;
    for (int i = 0; i <= 4; ++i) {
        v += std::abs(an.m[i]) * p;
        p *= std::abs(x);
    }
    return std::max(v, 1e-300);
}

// Log-spaced bisection sweep over [lo, hi]: returns every sign-change root of
// the quartic, an oracle independent of the companion-matrix eigensolve. The
// log spacing matters because the positive roots can sit dozens of decades
// below the Fujiwara magnitude bound.
std::vector<double> bisection_roots(const CoexistingAnalysis& an, double lo,
                                    double hi, int cells = 200000) {
    std::vector<double> roots;
    const double llo = std::log(lo), lhi = std::log(hi);
    double prev_x = lo, prev_v = quartic_value(an, lo);
    for (int i = 1; i <= cells; ++i) {
        const double x = std::exp(llo + (lhi - llo) * double(i) / cells);
        const double v = quartic_value(an, x);
        if (prev_v == 0.0) roots.push_back(prev_x);
        else if (v != 0.0 && std::signbit(v) != std::signbit(prev_v)) {
            double a = prev_x, b = x, fa = prev_v;
            for (int it = 0; it < 200; ++it) {
                const double mid = 0.5 * (a + b);
                const double fm = quartic_value(an, mid);
                if (fm == 0.0) { a = b = mid; break; }
                if (std::signbit(fm) == std::signbit(fa)) { a = mid; fa = fm; }
                else b = mid;
            }
            roots.push_back(0.5 * (a + b));
        }
        prev_x = x;
        prev_v = v;
    }
    return roots;
}

}  // namespace

TEST_CASE("tumor-free point matches the closed form at zero dose") {
    const ModelParams m = fixture_params();
    const auto eq = tumor_free_equilibrium(m, 0.0, 0.0);
    CHECK(eq.point.T == 0.0);
    CHECK(eq.point.D1 == 0.0);
    CHECK(eq.point.D2 == 0.0);
    // Frozen references from a 50-digit evaluation of the closed form.
    CHECK(eq.point.I == Catch::Approx(1.541684106497008031).epsilon(1e-14));
    const Rates a = Rates::from(m);
    CHECK(eq.point.F == Catch::Approx(1.0 / a.eps).epsilon(1e-14));
    CHECK(eq.residual <= 1e-12);
}

TEST_CASE("tumor-free point is a fixed point under positive doses") {
    const ModelParams m = fixture_params();
    for (auto [u1, u2] : {std::pair{0.5, 0.5}, {0.2, 0.8}, {1.0, 1.0}}) {
        const auto eq = tumor_free_equilibrium(m, u1, u2);
        CHECK(eq.residual <= 1e-12);
        CHECK(eq.point.I > 0.0);
        CHECK(eq.point.F > 0.0);
        const Rates a = Rates::from(m);
        CHECK(eq.point.D1 == Catch::Approx(u1 / a.gamma1).epsilon(1e-14));
        CHECK(eq.point.D2 == Catch::Approx(u2 / a.gamma2).epsilon(1e-14));
    }
}

TEST_CASE("tumor-free existence margins match frozen references") {
    const auto ex = tumor_free_existence(fixture_params(), 0.5, 0.5);
    CHECK(ex.immune_positive.margin ==
          Catch::Approx(112097.04628939648602).epsilon(1e-12));
    CHECK(ex.fat_positive.margin ==
          Catch::Approx(1.4826071915756744392e-5).epsilon(1e-12));
    CHECK(ex.holds());
}

TEST_CASE("tumor-free point reports nonexistence when chemo kills the fat pool") {
    ModelParams m = fixture_params();
    m.q3 = 0.5;  // massive chemo toxicity on fat
    CHECK_THROWS_AS(tumor_free_equilibrium(m, 1.0, 0.0), NonexistentEquilibrium);
    CHECK_FALSE(tumor_free_existence(m, 1.0, 0.0).fat_positive.holds());
    CHECK_THROWS_AS(tumor_free_equilibrium(m, -0.1, 0.0), std::invalid_argument);
}

TEST_CASE("closed-form eigenvalues agree with the dense eigensolve") {
    for (auto [u1, u2] : {std::pair{0.0, 0.0}, {0.5, 0.5}, {0.3, 0.9}}) {
        const auto rep = tumor_free_stability(fixture_params(), u1, u2);
        CHECK(rep.conditions.at("closed_form_matches_numeric"));
        // All eigenvalues real at the tumor-free point.
        for (const auto& l : rep.eigenvalues) CHECK(l.imag() == 0.0);
    }
}

TEST_CASE("tumor-free point is unstable under the baseline fat coupling") {
    const auto rep = tumor_free_stability(fixture_params(), 0.0, 0.0);
    CHECK(rep.verdict == Verdict::unstable);
    CHECK(rep.matignon_margin < 0.0);
    CHECK_FALSE(rep.conditions.at("immune_dominance"));
    // The tumor eigenvalue is the positive one.
    double max_real = -1e300;
    for (const auto& l : rep.eigenvalues) max_real = std::max(max_real, l.real());
    CHECK(max_real > 0.0);
}

TEST_CASE("engineered immune-dominant fixture is stable") {
    const auto rep = tumor_free_stability(stable_params(), 0.0, 0.0);
    CHECK(rep.verdict == Verdict::stable);
    CHECK(rep.matignon_margin > 0.0);
    CHECK(rep.conditions.at("immune_dominance"));
    CHECK(rep.conditions.at("fat_decay"));
    CHECK(rep.conditions.at("immune_decay"));
    for (const auto& l : rep.eigenvalues) CHECK(l.real() < 0.0);
}

TEST_CASE("matignon margin separates sectorial from non-sectorial spectra") {
    std::array<std::complex<double>, 5> eig{-1.0, -2.0, -3.0, -4.0,
                                            std::complex<double>(0.1, 1.0)};
    // |arg| of 0.1+1i is about 1.47 rad; for alpha = 0.9 the sector edge is
    // 0.45*pi ~ 1.41, so this spectrum is still (fractionally) stable.
    const double margin9 = detail::matignon_margin(eig, 0.9);
    CHECK(margin9 > 0.0);
    CHECK(detail::verdict_from_margin(margin9) == Verdict::stable);
    // At alpha -> 1 the sector closes to the half-plane and it goes unstable.
    const double margin99 = detail::matignon_margin(eig, 0.999);
    CHECK(margin99 < 0.0);
    CHECK(detail::verdict_from_margin(margin99) == Verdict::unstable);
    CHECK(detail::verdict_from_margin(0.0) == Verdict::marginal);
}

TEST_CASE("coexisting affine maps solve the tumor and fat nullclines") {
    const ModelParams m = fixture_params();
    const Rates a = Rates::from(m);
    for (auto [u1, u2] : {std::pair{0.0, 0.0}, {0.5, 0.5}}) {
        const auto an = coexisting_analysis(m, u1, u2);
        const double D1 = u1 / a.gamma1;
        for (double I : {0.5, 1.0, 3.7}) {
            const double T = an.k4 + an.k5 * I;
            const double F = an.k6 + an.k7 * I;
            const double nullT =
                a.r * (1.0 - a.p * T) - a.xi1 * I + a.c1 * F - a.q1 * D1;
            const double nullF = a.d * (1.0 - a.eps * F) - a.c2 * T - a.q3 * D1;
            // The k's come from near-cancelling combinations of huge
            // intermediates; scale the roundoff budget by their raw size.
            const double raw = std::abs(an.k1) + std::abs(an.k2 * an.k4) +
                               std::abs(an.k2 * an.k5) * I + std::abs(an.k4) +
                               std::abs(an.k5) * I;
            const double unit =
                std::max({a.c1, a.r * a.p, a.d * a.eps, a.c2});
            CHECK(nullT == Catch::Approx(0.0).margin(1e-14 * raw * unit + 1e-13));
            CHECK(nullF == Catch::Approx(0.0).margin(1e-14 * raw * unit + 1e-13));
        }
    }
}

TEST_CASE("companion roots are genuine quartic roots") {
    const auto an = coexisting_analysis(fixture_params(), 0.5, 0.5);
    CHECK(an.real_roots.size() <= 4);
    for (double r : an.real_roots) {
        const double rel = std::abs(quartic_value(an, r)) / quartic_scale(an, r);
        CHECK(rel < 1e-9);
    }
}

TEST_CASE("bisection oracle finds the same positive roots as the eigensolve") {
    for (auto [u1, u2] : {std::pair{0.0, 0.0}, {0.5, 0.5}, {1.0, 0.2}}) {
        const auto an = coexisting_analysis(fixture_params(), u1, u2);
        // Fujiwara bound on root magnitude.
        double bound = 0.0;
        for (int i = 0; i < 4; ++i)
            bound = std::max(bound,
                             std::pow(std::abs(an.m[i] / an.m[4]), 1.0 / (4 - i)));
        bound = 2.0 * bound + 1.0;
        const auto oracle = bisection_roots(an, 1e-12, bound);
        std::vector<double> mine;
        for (double r : an.real_roots)
            if (r > 0.0) mine.push_back(r);
        REQUIRE(mine.size() == oracle.size());
        for (std::size_t i = 0; i < mine.size(); ++i)
            CHECK(mine[i] == Catch::Approx(oracle[i]).epsilon(1e-6));
    }
}

TEST_CASE("descartes case index matches the coefficient signs") {
    const auto an = coexisting_analysis(fixture_params(), 0.5, 0.5);
    CHECK(an.m[4] < 0.0);
    CHECK(an.m[0] < 0.0);
    const bool s1 = an.m[1] > 0.0, s2 = an.m[2] > 0.0, s3 = an.m[3] > 0.0;
    int expect;
    if (!s1 && !s2 && !s3) expect = 1;
    else if (s1 && !s2 && !s3) expect = 2;
    else if (!s1 && s2 && !s3) expect = 3;
    else if (s1 && s2 && !s3) expect = 4;
    else if (!s1 && !s2 && s3) expect = 5;
    else if (!s1 && s2 && s3) expect = 6;
    else if (s1 && s2 && s3) expect = 7;
    else expect = 8;
    CHECK(an.descartes_case == expect);

    // Case 1 (all-negative coefficients) admits no positive root.
    if (an.descartes_case == 1)
        for (double r : an.real_roots) CHECK(r <= 0.0);
}

TEST_CASE("coexisting candidates are genuine fixed points") {
    const ModelParams m = fixture_params();
    const Rates a = Rates::from(m);
    for (auto [u1, u2] : {std::pair{0.0, 0.0}, {0.5, 0.5}}) {
        for (const auto& eq : coexisting_candidates(m, u1, u2)) {
            CHECK(eq.kind == EquilibriumKind::coexisting);
            CHECK(eq.point.T > 0.0);
            CHECK(eq.point.I > 0.0);
            CHECK(eq.point.F > 0.0);
            CHECK(eq.residual <= 1e-6);
            const Vec5 f = state_rhs(eq.point, {u1, u2}, a);
            // Absolute residual sanity on the drug rows, which are exact.
            CHECK(f[3] == Catch::Approx(0.0).margin(1e-12));
            CHECK(f[4] == Catch::Approx(0.0).margin(1e-12));
        }
    }
}

TEST_CASE("no coexisting point survives at zero dose in this fixture") {
    // At u = 0 every positive quartic root maps to a non-positive tumor or
    // fat level, so the candidate list must stay empty.
    const auto an = coexisting_analysis(fixture_params(), 0.0, 0.0);
    CHECK(an.candidates.empty());
    for (double r : an.real_roots)
        if (r > 0.0)
            CHECK((an.k4 + an.k5 * r <= 0.0 || an.k6 + an.k7 * r <= 0.0));
}

TEST_CASE("coexisting stability report is internally consistent") {
    const ModelParams m = fixture_params();
    const auto cands = coexisting_candidates(m, 0.5, 0.5);
    REQUIRE_FALSE(cands.empty());
    for (const auto& eq : cands) {
        const auto rep = coexisting_stability(eq, m);

        // The cubic coefficients must reproduce the 3x3 block spectrum:
        // sum = -c1, pair-sum = c2, product = -c3.
        std::vector<std::complex<double>> block;
        const Rates a = Rates::from(m);
        for (const auto& l : rep.eigenvalues) {
            if (std::abs(l - std::complex<double>(-a.gamma1)) < 1e-9 * (1.0 + a.gamma1))
                continue;
            if (std::abs(l - std::complex<double>(-a.gamma2)) < 1e-9 * (1.0 + a.gamma2))
                continue;
            block.push_back(l);
        }
        REQUIRE(block.size() == 3);
        const auto sum = block[0] + block[1] + block[2];
        const auto pair =
            block[0] * block[1] + block[0] * block[2] + block[1] * block[2];
        const auto prod = block[0] * block[1] * block[2];
        const double scale =
            std::max({1.0, std::abs(rep.cubic_c1), std::abs(rep.cubic_c2),
                      std::abs(rep.cubic_c3)});
        CHECK(std::abs(sum + rep.cubic_c1) < 1e-7 * scale);
        CHECK(std::abs(pair - rep.cubic_c2) < 1e-7 * scale);
        CHECK(std::abs(prod + rep.cubic_c3) < 1e-7 * scale);

        // Analytic branch verdicts may not cover every spectrum, but whenever
        // one fires the numeric Matignon check must agree.
        if (rep.conditions.at("analytic_stable"))
            CHECK(rep.verdict == Verdict::stable);
    }
    CHECK_THROWS_AS(
        coexisting_stability(tumor_free_equilibrium(m, 0.0, 0.0), m),
        std::invalid_argument);
}
