#include <catch_amalgamated.hpp>

#include <random>

#include "bvy/hypotheses.hpp"

using namespace bvy;

namespace {

struct Row {
  SpaceSpec X;
  int n;
  double gamma, q;
  bool holds;
  const char* rule;  // prefix of the expected label, empty when it does not matter
};

bool starts_with(const std::string& s, const char* prefix) { return s.rfind(prefix, 0) == 0; }

}  // namespace

TEST_CASE("equivalence hypotheses truth table", "[hypotheses]") {
  const std::vector<Row> rows = {
      {Lebesgue{2.0}, 1, 1.0, 1.0, true, "case (a)"},
      {Lebesgue{1.0}, 1, -2.0, 1.0, true, "case (d)"},
      {Lebesgue{1.0}, 1, -0.5, 1.0, false, ""},
      {Lebesgue{1.0}, 2, 1.0, 2.0, false, ""},
      {Lebesgue{1.0}, 2, 1.0, 1.5, true, "case (b)"},
      {Lebesgue{2.0}, 2, -1.0, 2.0, true, "case (c)"},
      {Lebesgue{2.0}, 2, -1.0, 3.0, false, ""},
      {Lebesgue{2.0}, 2, 1.0, 2.0, true, "case (b)"},
      {Lebesgue{2.0}, 3, 1.0, 7.0, false, ""},
      // |x|^{-1/2} is A_1, so p = r = 2 is admissible
      {WeightedLebesgue{2.0, Weight::power(-0.5)}, 1, 1.0, 1.0, true, "case (b)"},
      // |x|^2 on the line is in A_t only for t > 3: no p in [1, 2] works
      {WeightedLebesgue{2.0, Weight::power(2.0)}, 1, 1.0, 1.0, false, ""},
      // |x|^{1/2}: A_t for t > 3/2, so p < 4/3 and case (a) applies
      {WeightedLebesgue{2.0, Weight::power(0.5)}, 1, 1.0, 1.0, true, "case (a)"},
      {WeightedLebesgue{1.0, Weight::constant(1.0)}, 1, -2.0, 1.0, true, "case (d)"},
      {Lorentz{1.0, 1.0}, 1, 1.0, 2.0, false, ""},
      {Lorentz{3.0, 2.0}, 1, 1.0, 2.0, true, "case (a)"},
      {Lorentz{2.0, 1.0}, 2, 1.0, 1.0, false, ""},
      {Orlicz{OrliczFunction{{1.5, 3.0}}}, 2, -1.0, 1.0, true, "case (c)"},
      {Orlicz{OrliczFunction{{1.5, 3.0}}}, 2, -1.0, 1.5, false, ""},
      {Orlicz{OrliczFunction{{1.0}}}, 1, -2.0, 1.0, true, "case (d)"},
      {MixedNorm{{1.0, 2.0}}, 2, 1.0, 1.0, false, ""},
      {MixedNorm{{3.0, 4.0}}, 2, -1.0, 9.0, true, "case (a)"},
      {VariableLebesgue{ExponentFunction{1.0, 0.0}}, 1, -2.0, 1.0, true, "case (d)"},
      {VariableLebesgue{ExponentFunction{1.5, 0.0}}, 2, -1.0, 1.5, false, ""},
      {Morrey{2.0, 3.0, {}}, 1, -1.0, 5.0, true, "case (a)"},
      {Morrey{1.0, 2.0, {}}, 1, -2.0, 1.0, true, "case (d)"},
      {OrliczSlice{OrliczFunction{{1.0}}, 1.5, 0.3}, 1, -2.0, 1.0, true, "case (e)"},
      {OrliczSlice{OrliczFunction{{2.0}}, 1.0, 0.3}, 1, -2.0, 1.0, true, "case (d)"},
      {OrliczSlice{OrliczFunction{{2.0}}, 1.0, 0.3}, 1, -0.5, 1.0, false, ""},
      {Lebesgue{2.0}, 1, 0.0, 1.0, false, ""},
      {Lebesgue{2.0}, 1, 1.0, 0.0, false, ""},
  };
  for (const Row& r : rows) {
    const Verdict v = equivalence_hypotheses(r.X, r.n, r.gamma, r.q);
    INFO(to_string(r.X) << " n=" << r.n << " gamma=" << r.gamma << " q=" << r.q << " -> " << v.rule);
    CHECK(v.holds == r.holds);
    if (r.holds) CHECK(starts_with(v.rule, r.rule));
  }
}

TEST_CASE("limit hypotheses add the gamma < 0 constraint", "[hypotheses]") {
  const std::vector<Row> rows = {
      {Lebesgue{2.0}, 1, -2.0, 3.0, true, ""},
      {Lebesgue{2.0}, 1, -2.0, 4.5, false, ""},
      {Lebesgue{2.0}, 1, -0.5, 1.0, false, ""},
      {Lebesgue{1.0}, 1, -2.0, 1.0, true, ""},
      {Lebesgue{3.0}, 2, -1.0, 3.0, true, ""},
      {Lebesgue{3.0}, 2, -1.0, 4.5, false, ""},
      {Lebesgue{2.0}, 1, 1.0, 7.0, true, ""},
      {WeightedLebesgue{2.0, Weight::power(-0.5)}, 1, -2.0, 2.0, true, ""},
  };
  for (const Row& r : rows) {
    const Verdict v = limit_hypotheses(r.X, r.n, r.gamma, r.q);
    INFO(to_string(r.X) << " n=" << r.n << " gamma=" << r.gamma << " q=" << r.q << " -> " << v.rule);
    CHECK(v.holds == r.holds);
  }
}

TEST_CASE("limit hypotheses imply equivalence hypotheses", "[hypotheses][property]") {
  std::mt19937_64 rng(51);
  std::uniform_real_distribution<double> ug(-4.0, 3.0), uq(0.25, 6.0), up(1.0, 4.0);
  std::uniform_int_distribution<int> un(1, 3);
  for (int k = 0; k < 2000; ++k) {
    const double p = up(rng), g = ug(rng), q = uq(rng);
    const int n = un(rng);
    if (g == 0.0) continue;
    for (const SpaceSpec& X : std::vector<SpaceSpec>{Lebesgue{p}, Morrey{p, p + 1.0, {}}, Lorentz{p, 2.0}}) {
      if (limit_hypotheses(X, n, g, q).holds) CHECK(equivalence_hypotheses(X, n, g, q).holds);
    }
    // a constant weight changes nothing
    INFO("p=" << p << " n=" << n << " g=" << g << " q=" << q);
    CHECK(equivalence_hypotheses(WeightedLebesgue{p, Weight::constant(2.0)}, n, g, q).holds ==
          equivalence_hypotheses(Lebesgue{p}, n, g, q).holds);
  }
}

TEST_CASE("Gagliardo-Nirenberg hypotheses", "[hypotheses]") {
  CHECK_FALSE(gn_hypotheses(Lebesgue{1.0}, 1, 1.0).holds);
  CHECK(gn_hypotheses(Lebesgue{2.0}, 1, 1.0).holds);
  CHECK(gn_hypotheses(Lebesgue{2.0}, 2, -1.0).holds);
  CHECK_FALSE(gn_hypotheses(Lebesgue{2.0}, 1, 0.0).holds);
  CHECK_FALSE(gn_hypotheses(WeightedLebesgue{2.0, Weight::power(2.0)}, 1, 1.0).holds);
  CHECK(gn_hypotheses(WeightedLebesgue{2.0, Weight::power(-0.5)}, 1, 1.0).holds);
  CHECK_FALSE(gn_hypotheses(Lorentz{2.0, 1.0}, 1, 1.0).holds);
  CHECK(gn_hypotheses(Lorentz{2.0, 3.0}, 1, 1.0).holds);
}

TEST_CASE("weight classes of power and log weights", "[hypotheses]") {
  using detail::weight_class;
  CHECK(weight_class(Weight::power(-0.5), 1).in(1.0));
  CHECK_FALSE(weight_class(Weight::power(-1.0), 1).in(100.0));
  CHECK(weight_class(Weight::power(-1.0), 2).in(1.0));
  CHECK_FALSE(weight_class(Weight::power(1.0), 1).in(2.0));
  CHECK(weight_class(Weight::power(1.0), 1).in(2.01));
  CHECK(weight_class(Weight::power(1.0), 2).in(1.51));
  CHECK(weight_class(Weight::log(-1.0), 1).in(1.0));
  CHECK_FALSE(weight_class(Weight::log(1.0), 1).in(1.0));
  CHECK(weight_class(Weight::log(1.0), 1).in(1.01));
}
