#include <gtest/gtest.h>

#include <complex>
#include <random>

#include <uve/variety.hpp>

using namespace uve;
using cd = std::complex<double>;

namespace {

extension_config<double> one_factor(const cd &g2, const cd &g3) {
    return extension_config<double>(
        std::vector<curve_invariants<double>>{curve_invariants<double>{g2, g3}});
}

} // namespace

TEST(Parse, LinearProjective) {
    const auto spec = parse_variety<double>("X3_1 - 2*X0_1", 1);
    ASSERT_EQ(spec.polys.size(), 1u);
    EXPECT_EQ(spec.delta, 1);
    EXPECT_EQ(spec.polys[0].factor_degree[0], 1);
    EXPECT_EQ(spec.polys[0].terms.size(), 2u);
}

TEST(Parse, AffineHomogenization) {
    const auto spec = parse_variety<double>("x1_1^3 - x2_1", 1);
    EXPECT_EQ(spec.delta, 3);
    // x2 picks up X0^2
    bool found = false;
    for (const auto &t : spec.polys[0].terms) {
        if (t.expo[0][2] == 1) {
            EXPECT_EQ(t.expo[0][0], 2);
            found = true;
        }
    }
    EXPECT_TRUE(found);
}

TEST(Parse, ConstantsHomogenize) {
    const auto spec = parse_variety<double>("x1_1 + 1", 1);
    EXPECT_EQ(spec.delta, 1);
    ASSERT_EQ(spec.polys[0].terms.size(), 2u);
}

TEST(Parse, RationalAndDecimalCoefficients) {
    const auto spec = parse_variety<double>("2/3*X1_1 - 0.25*X0_1\n# comment\n\n5*X2_1", 1);
    ASSERT_EQ(spec.polys.size(), 2u);
    const auto &t = spec.polys[0].terms;
    ASSERT_EQ(t.size(), 2u);
    for (const auto &term : t) {
        if (term.expo[0][1] == 1) {
            ASSERT_TRUE(term.exact.has_value());
            EXPECT_EQ(term.exact->num, 2);
            EXPECT_EQ(term.exact->den, 3);
        } else {
            EXPECT_FALSE(term.exact.has_value()); // decimal input stays floating
            EXPECT_NEAR(term.coeff.real(), -0.25, 1e-15);
        }
    }
}

TEST(Parse, Errors) {
    EXPECT_THROW(parse_variety<double>("", 1), empty_system);
    EXPECT_THROW(parse_variety<double>("# only a comment\n", 1), empty_system);
    EXPECT_THROW(parse_variety<double>("X1_1 + X0_1^2", 1), inhomogeneous_degree);
    EXPECT_THROW(parse_variety<double>("X5_1", 1), syntax_error);
    EXPECT_THROW(parse_variety<double>("x0_1", 1), syntax_error);
    EXPECT_THROW(parse_variety<double>("X1_2", 1), syntax_error);
    EXPECT_THROW(parse_variety<double>("X1_1 +", 1), syntax_error);
    EXPECT_THROW(parse_variety<double>("2 ** X1_1", 1), syntax_error);
    try {
        parse_variety<double>("X1_1 - X0_1\nX1_1 @ X0_1", 1);
        FAIL() << "expected syntax_error";
    } catch (const syntax_error &e) {
        EXPECT_EQ(e.line, 2u);
        EXPECT_GT(e.col, 1u);
    }
}

TEST(Eval, IdentityAndAffineChart) {
    const auto cfg = one_factor(1.0, 2.0);
    const auto x1 = parse_variety<double>("X1_1", 1);
    const auto id = identity_point(cfg);
    EXPECT_LT(std::abs(eval_variety(x1, cfg, id)[0]), 1e-15);

    const auto x0 = parse_variety<double>("X0_1", 1);
    const auto pt = betti_to_point(cfg, betti_point<double>::make({{0.3, 0.4}}));
    const auto coords = pt.projective(0);
    double m = 0;
    for (const auto &c : coords) m = std::max(m, std::abs(c));
    // scaled residual of X0 at an affine point is exactly 1/max|coord|
    EXPECT_NEAR(std::abs(eval_variety(x0, cfg, pt)[0]), 1.0 / m, 1e-12);
}

TEST(Eval, InterpolatedVanishingPoint) {
    // construct a linear polynomial vanishing at a sampled point by solving
    // for its coefficient, then check the scaled residual is tiny
    const auto cfg = one_factor(cd(2, 1), cd(-1, 3));
    const auto pt = betti_to_point(cfg, betti_point<double>::make({{0.27, 0.61}}));
    const auto c = pt.projective(0);
    char buf[96];
    std::snprintf(buf, sizeof(buf), "X1_1 %c %.17g*X0_1", c[1].real() >= 0 ? '-' : '+',
                  std::abs(c[1].real()));
    const auto spec = parse_variety<double>(buf, 1);
    const auto r = eval_variety(spec, cfg, pt)[0];
    EXPECT_LT(std::abs(r.real()), 1e-12);
}

TEST(Eval, ScaleInvariance) {
    std::mt19937_64 rng(44);
    std::uniform_real_distribution<double> u(-2.0, 2.0);
    const auto spec = parse_variety<double>("X1_1^2*X3_2 - 2*X0_1*X2_1*X4_2 + X2_1^2*X0_2", 2);
    for (int trial = 0; trial < 50; ++trial) {
        std::vector<std::array<cd, 5>> coords(2);
        for (auto &f : coords) {
            for (auto &x : f) x = cd(u(rng), u(rng));
        }
        const cd base = eval_poly<double>(spec.polys[0], coords);
        auto scaled = coords;
        const cd s1(u(rng), u(rng)), s2(u(rng), u(rng));
        if (std::abs(s1) < 0.1 || std::abs(s2) < 0.1) continue;
        for (auto &x : scaled[0]) x *= s1;
        for (auto &x : scaled[1]) x *= s2;
        const cd rescaled = eval_poly<double>(spec.polys[0], scaled);
        // invariant up to the phase of the scalars
        EXPECT_NEAR(std::abs(rescaled), std::abs(base), 1e-10 * (1.0 + std::abs(base)));
    }
}

TEST(Charts, CountAndIdentitySubstitution) {
    const auto spec = parse_variety<double>("X1_1 - X0_1", 1);
    const auto charts = chart_specializations(spec);
    EXPECT_EQ(charts.size(), 2u); // 2^g with g = 1

    // g=2, system independent of factor 2: the two charts that differ only in
    // factor 2 coincide
    const auto spec2 = parse_variety<double>("X1_1^2 - X0_1*X2_1", 2);
    const auto charts2 = chart_specializations(spec2);
    ASSERT_EQ(charts2.size(), 4u);
    const auto s_a = serialize_variety(charts2[1].system); // factor1 affine, factor2 identity
    const auto s_b = serialize_variety(charts2[3].system); // factor1 affine, factor2 affine
    EXPECT_EQ(s_a, s_b);
}

TEST(Charts, DegreeNeverIncreases) {
    const auto spec = parse_variety<double>(
        "X1_1^2*X3_2 - X0_1*X2_1*X4_2 + X2_1^2*X0_2\nX3_1*X1_2 - X4_2*X0_1", 2);
    const auto charts = chart_specializations(spec);
    for (const auto &cs : charts) {
        EXPECT_LE(cs.system.delta, spec.delta);
        for (const auto &p : cs.system.polys) {
            for (int fd : p.factor_degree) EXPECT_LE(fd, spec.delta);
        }
    }
}

TEST(Serialize, RoundTrip) {
    const std::string text = "2/3*X1_1^2 - X0_1*X2_1 + 7*X3_1*X4_1\nX2_1 - 145*X0_1";
    const auto spec = parse_variety<double>(text, 1);
    const auto s = serialize_variety(spec);
    const auto spec2 = parse_variety<double>(s, 1);
    EXPECT_EQ(spec2.delta, spec.delta);
    EXPECT_EQ(serialize_variety(spec2), s);
    ASSERT_EQ(spec2.polys.size(), spec.polys.size());
    for (std::size_t i = 0; i < spec.polys.size(); ++i) {
        ASSERT_EQ(spec2.polys[i].terms.size(), spec.polys[i].terms.size());
        for (std::size_t t = 0; t < spec.polys[i].terms.size(); ++t) {
            EXPECT_EQ(spec2.polys[i].terms[t].expo, spec.polys[i].terms[t].expo);
            EXPECT_EQ(spec2.polys[i].terms[t].exact.has_value(),
                      spec.polys[i].terms[t].exact.has_value());
            EXPECT_LT(std::abs(spec2.polys[i].terms[t].coeff - spec.polys[i].terms[t].coeff),
                      1e-15);
        }
    }
}

TEST(Serialize, DecimalRoundTrip) {
    const auto spec = parse_variety<double>("0.73110000000000008*X3_1 - x1_1", 1);
    const auto spec2 = parse_variety<double>(serialize_variety(spec), 1);
    EXPECT_EQ(serialize_variety(spec2), serialize_variety(spec));
}

TEST(Terms, LikeTermsCombine) {
    const auto spec = parse_variety<double>("X1_1 + X1_1 - X0_1", 1);
    ASSERT_EQ(spec.polys[0].terms.size(), 2u);
    for (const auto &t : spec.polys[0].terms) {
        if (t.expo[0][1] == 1) {
            ASSERT_TRUE(t.exact.has_value());
            EXPECT_EQ(t.exact->num, 2);
        }
    }
    // exact cancellation drops the term
    const auto spec2 = parse_variety<double>("X1_1 - X1_1 + X0_1", 1);
    EXPECT_EQ(spec2.polys[0].terms.size(), 1u);
}
