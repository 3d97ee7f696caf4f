#include <doctest.h>

#include <numeric>
#include <set>

#include "kgeeg/error.hpp"
#include "kgeeg/split.hpp"

using namespace kgeeg;

namespace {

std::vector<std::string> subjects(std::size_t n) {
  std::vector<std::string> s;
  for (std::size_t i = 0; i < n; ++i) s.push_back("S" + std::to_string(100 + i));
  return s;
}

}  // namespace

TEST_SUITE("split") {
  TEST_CASE("loso over 9 subjects gives 9 single-subject folds") {
    const SplitPlan plan = make_split(subjects(9), SplitScheme::loso, 0, 1);
    CHECK(plan.n_folds == 9);
    for (std::size_t f = 0; f < 9; ++f) {
      CHECK(plan.eval_subjects(f).size() == 1);
      CHECK(plan.train_subjects(f).size() == 8);
    }
  }

  TEST_CASE("folds partition the subjects; train and eval are disjoint") {
    for (std::uint64_t seed = 0; seed < 20; ++seed) {
      for (std::size_t k : {2u, 3u, 5u}) {
        const auto subj = subjects(7 + seed % 5);
        const SplitPlan plan = make_split(subj, SplitScheme::kfold, k, seed);
        std::multiset<std::string> seen;
        for (std::size_t f = 0; f < plan.n_folds; ++f) {
          const auto ev = plan.eval_subjects(f);
          const auto tr = plan.train_subjects(f);
          CHECK(ev.size() + tr.size() == subj.size());
          for (const auto& s : ev) {
            seen.insert(s);
            CHECK(std::find(tr.begin(), tr.end(), s) == tr.end());
          }
          // round-robin dealing keeps fold sizes within one
          CHECK(ev.size() >= subj.size() / k);
          CHECK(ev.size() <= subj.size() / k + 1);
        }
        CHECK(seen == std::multiset<std::string>(subj.begin(), subj.end()));
      }
    }
  }

  TEST_CASE("kfold is deterministic per seed") {
    const auto a = make_split(subjects(10), SplitScheme::kfold, 5, 42);
    const auto b = make_split(subjects(10), SplitScheme::kfold, 5, 42);
    CHECK(a.assignments == b.assignments);
  }

  TEST_CASE("invalid splits") {
    CHECK_THROWS_AS(make_split({}, SplitScheme::kfold, 5, 0), ParameterError);
    CHECK_THROWS_AS(make_split(subjects(3), SplitScheme::kfold, 5, 0), ParameterError);
    CHECK_THROWS_AS(make_split(subjects(3), SplitScheme::kfold, 1, 0), ParameterError);
    CHECK_THROWS_AS(make_split(subjects(1), SplitScheme::loso, 0, 0), ParameterError);
  }

  TEST_CASE("fraction subsetting") {
    std::vector<int> items(10);
    std::iota(items.begin(), items.end(), 0);
    CHECK(subset_fraction(items, 1.0, 3) == items);
    const auto half = subset_fraction(items, 0.5, 3);
    CHECK(half.size() == 5);
    CHECK(std::is_sorted(half.begin(), half.end()));
    CHECK(half == subset_fraction(items, 0.5, 3));
    CHECK(fraction_count(200, 0.01) == 2);
    CHECK(fraction_count(10, 0.01) == 1);
    CHECK(fraction_count(0, 0.5) == 0);
    CHECK(fraction_count(10, 0.3) == 3);
    CHECK_THROWS_AS(subset_fraction(items, 0.0, 1), ParameterError);
    CHECK_THROWS_AS(subset_fraction(items, 1.5, 1), ParameterError);
  }

  TEST_CASE("different seeds draw different subsets") {
    std::vector<int> items(100);
    std::iota(items.begin(), items.end(), 0);
    std::set<std::vector<int>> draws;
    for (std::uint64_t s = 0; s < 5; ++s) draws.insert(subset_fraction(items, 0.1, s));
    CHECK(draws.size() > 1);
  }
}
