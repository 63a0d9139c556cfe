#include "bomf/core.hpp"
#include "bomf/error.hpp"

#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>

using namespace bomf;

namespace {

ObjectiveEntry entry(Direction d, double lo, double hi, ObjectiveKind k = ObjectiveKind::metric) {
    return {"o", d, lo, hi, k};
}

} // namespace

TEST_SUITE("core") {

TEST_CASE("normalize window ends and affine form") {
    CHECK(normalize(0.3, entry(Direction::maximize, 0.3, 0.4)) == 0.0);
    CHECK(normalize(0.35, entry(Direction::maximize, 0.3, 0.4)) == doctest::Approx(0.5).epsilon(1e-12));
    CHECK(normalize(2.25, entry(Direction::minimize, 2.0, 3.0, ObjectiveKind::loss)) == doctest::Approx(0.75));
    // Out of window saturates.
    CHECK(normalize(5.0, entry(Direction::maximize, 0.3, 0.4)) == 1.0);
    CHECK(normalize(-5.0, entry(Direction::maximize, 0.3, 0.4)) == 0.0);
    CHECK(normalize(9.0, entry(Direction::minimize, 2.0, 3.0)) == 0.0);
}

TEST_CASE("normalize rejects non-finite values") {
    const auto e = entry(Direction::maximize, 0.0, 1.0);
    CHECK_THROWS_AS((void)normalize(std::numeric_limits<double>::quiet_NaN(), e), EvaluationError);
    CHECK_THROWS_AS((void)normalize(std::numeric_limits<double>::infinity(), e), EvaluationError);
}

TEST_CASE("normalize is monotone and inverts denormalize in the window") {
    std::mt19937_64 rng(3);
    std::uniform_real_distribution<double> u(-1.0, 3.0);
    for (auto dir : {Direction::maximize, Direction::minimize}) {
        const auto e = entry(dir, 0.5, 1.7);
        for (int i = 0; i < 500; ++i) {
            double a = u(rng), b = u(rng);
            if (a > b) std::swap(a, b);
            if (dir == Direction::maximize)
                CHECK(normalize(a, e) <= normalize(b, e));
            else
                CHECK(normalize(a, e) >= normalize(b, e));
            const double t = std::uniform_real_distribution<double>(0.0, 1.0)(rng);
            CHECK(normalize(denormalize(t, e), e) == doctest::Approx(t).epsilon(1e-12));
        }
    }
}

TEST_CASE("derived windows") {
    const std::vector<double> metric{0.832, 0.841};
    auto [lo, hi] = derive_norm_bounds(metric, ObjectiveKind::metric, Direction::maximize);
    CHECK(lo == doctest::Approx(0.8));
    CHECK(hi == doctest::Approx(0.9));

    const std::vector<double> single{0.5};
    std::tie(lo, hi) = derive_norm_bounds(single, ObjectiveKind::metric, Direction::maximize);
    CHECK(lo == doctest::Approx(0.5));
    CHECK(hi == doctest::Approx(0.6));

    const std::vector<double> loss{1.234, 1.5, 2.0};
    std::tie(lo, hi) = derive_norm_bounds(loss, ObjectiveKind::loss, Direction::minimize);
    CHECK(hi - lo == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(lo == doctest::Approx(1.2));
    // Members worse than the best loss stay above zero after normalization.
    const ObjectiveEntry le{"loss", Direction::minimize, lo, hi, ObjectiveKind::loss};
    CHECK(normalize(2.0, le) > 0.0);

    CHECK_THROWS_AS((void)derive_norm_bounds({}, ObjectiveKind::metric, Direction::maximize), InvalidArgument);
}

TEST_CASE("derived window always contains the best value") {
    std::mt19937_64 rng(11);
    std::uniform_real_distribution<double> u(0.0, 3.0);
    for (int t = 0; t < 300; ++t) {
        std::vector<double> v(1 + t % 7);
        for (auto& x : v) x = u(rng);
        if (t % 5 == 0) v[0] = std::round(v[0] * 10.0) / 10.0;  // exact tenths
        for (auto kind : {ObjectiveKind::metric, ObjectiveKind::loss}) {
            for (auto dir : {Direction::maximize, Direction::minimize}) {
                const auto [lo, hi] = derive_norm_bounds(v, kind, dir);
                const double best = dir == Direction::maximize ? *std::max_element(v.begin(), v.end())
                                                               : *std::min_element(v.begin(), v.end());
                CHECK(best >= lo - 1e-9);
                CHECK(best <= hi);
                CHECK(hi - lo == doctest::Approx(kind == ObjectiveKind::metric ? 0.1 : 1.0));
            }
        }
    }
}

TEST_CASE("scalarize_sum filters by kind and ignores order") {
    const ObjectiveSpec two({{"a", Direction::maximize, 0, 1, ObjectiveKind::metric},
                             {"b", Direction::maximize, 0, 1, ObjectiveKind::metric}});
    const std::vector<double> v{0.2, 0.3};
    CHECK(scalarize_sum(v, two, KindFilter::all) == doctest::Approx(0.5));

    const ObjectiveSpec mixed({{"loss", Direction::minimize, 0, 1, ObjectiveKind::loss},
                               {"m", Direction::maximize, 0, 1, ObjectiveKind::metric}});
    const std::vector<double> lm{0.9, 0.4};
    CHECK(scalarize_sum(lm, mixed, KindFilter::metrics) == doctest::Approx(0.4));
    CHECK(scalarize_sum(lm, mixed, KindFilter::losses) == doctest::Approx(0.9));

    const ObjectiveSpec three({{"a", Direction::maximize, 0, 1, ObjectiveKind::metric},
                               {"b", Direction::maximize, 0, 1, ObjectiveKind::metric},
                               {"c", Direction::maximize, 0, 1, ObjectiveKind::metric}});
    const std::vector<double> k3{0.1, 0.2, 0.7};
    const std::vector<double> k3p{0.7, 0.1, 0.2};
    CHECK(scalarize_sum(k3, three, KindFilter::all) == doctest::Approx(1.0));
    CHECK(scalarize_sum(k3p, three, KindFilter::all) == doctest::Approx(scalarize_sum(k3, three, KindFilter::all)));
    CHECK_THROWS_AS((void)scalarize_sum(v, two, KindFilter::losses), InvalidArgument);
}

TEST_CASE("objective spec validation") {
    CHECK_THROWS_AS(ObjectiveSpec({{"a", Direction::maximize, 1.0, 1.0, ObjectiveKind::metric}}), InvalidArgument);
    CHECK_THROWS_AS(ObjectiveSpec({{"a", Direction::maximize, 0, 1, ObjectiveKind::metric},
                                   {"a", Direction::maximize, 0, 1, ObjectiveKind::metric}}),
                    InvalidArgument);
    const ObjectiveSpec metric_only({{"a", Direction::maximize, 0, 1, ObjectiveKind::metric}});
    CHECK_THROWS_AS(metric_only.require_mobo_shape(), InvalidArgument);
}

TEST_CASE("parameter space maps through the unit cube") {
    const BoundedParamSpace space({{"lr", 1e-3, 10.0, Scale::log, false}, {"bs", 4, 64, Scale::linear, true}});
    const std::vector<double> x{0.1, 16};
    const auto u = space.to_unit(x);
    CHECK(u[0] == doctest::Approx(0.5));
    CHECK(u[1] == doctest::Approx(0.2));
    const auto back = space.from_unit(u);
    CHECK(back[0] == doctest::Approx(0.1));
    CHECK(back[1] == 16.0);

    std::mt19937_64 rng(5);
    for (int i = 0; i < 200; ++i) {
        std::vector<double> r{std::uniform_real_distribution<double>(-0.5, 1.5)(rng),
                              std::uniform_real_distribution<double>(-0.5, 1.5)(rng)};
        const auto p = space.from_unit(r);
        CHECK(space.contains(p));
        CHECK(p[1] == std::round(p[1]));
    }
    CHECK_THROWS_AS(BoundedParamSpace({{"lr", 0.0, 1.0, Scale::log, false}}), InvalidArgument);
    CHECK_THROWS_AS(BoundedParamSpace({{"a", 1.0, 0.0, Scale::linear, false}}), InvalidArgument);
}

}
