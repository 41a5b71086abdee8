// Copyright 2026 The fsgr Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "fsgr/eval.h"

#include <algorithm>
#include <random>

#include <gtest/gtest.h>

#include "fsgr/errors.h"
#include "testing/fixtures.h"

namespace fsgr {
namespace {

RunResult ranked(const std::string& qid, const std::vector<std::string>& docs) {
  RunResult r{qid, {}};
  for (std::size_t i = 0; i < docs.size(); ++i) {
    r.ranked.push_back({docs[i], -static_cast<double>(i), "", static_cast<int>(i) + 1});
  }
  return r;
}

// Rank of the first relevant doc, 0 when absent; computed independently of
// the library.
int first_hit(const RunResult& r, const std::set<std::string>& rel) {
  for (std::size_t i = 0; i < r.ranked.size(); ++i) {
    if (rel.contains(r.ranked[i].doc_ref)) return static_cast<int>(i) + 1;
  }
  return 0;
}

TEST(EvalTest, TwoQueryFixture) {
  Qrels qrels = {{"q1", {"a"}}, {"q2", {"c"}}};
  std::vector<RunResult> run = {ranked("q1", {"a", "b", "c"}),
                                ranked("q2", {"a", "b", "c"})};
  auto m = evaluate(run, qrels);
  EXPECT_DOUBLE_EQ(m.recall_at_1, 0.5);
  EXPECT_DOUBLE_EQ(m.recall_at_10, 1.0);
  EXPECT_NEAR(m.mrr_at_100, (1.0 + 1.0 / 3) / 2, 1e-9);
  EXPECT_EQ(m.n_queries, 2);
}

TEST(EvalTest, AllAtRankOne) {
  Qrels qrels = {{"q1", {"a"}}, {"q2", {"b"}}};
  std::vector<RunResult> run = {ranked("q1", {"a"}), ranked("q2", {"b", "a"})};
  EXPECT_DOUBLE_EQ(recall_at_k(run, qrels, 1), 1.0);
  EXPECT_DOUBLE_EQ(mrr_at_k(run, qrels), 1.0);
}

TEST(EvalTest, NoRelevantRetrieved) {
  Qrels qrels = {{"q1", {"z"}}};
  std::vector<RunResult> run = {ranked("q1", {"a", "b"})};
  EXPECT_DOUBLE_EQ(recall_at_k(run, qrels, 10), 0.0);
  EXPECT_DOUBLE_EQ(mrr_at_k(run, qrels), 0.0);
}

TEST(EvalTest, MrrCutoff) {
  std::vector<std::string> docs;
  for (int i = 0; i < 101; ++i) docs.push_back("d" + std::to_string(i));
  Qrels qrels = {{"q1", {"d100"}}};
  std::vector<RunResult> run = {ranked("q1", docs)};
  EXPECT_DOUBLE_EQ(mrr_at_k(run, qrels, 100), 0.0);
  EXPECT_NEAR(mrr_at_k(run, qrels, 101), 1.0 / 101, 1e-15);
}

TEST(EvalTest, UnjudgedRunQueryIsAnError) {
  Qrels qrels = {{"q1", {"a"}}};
  std::vector<RunResult> run = {ranked("q1", {"a"}), ranked("qX", {"a"})};
  try {
    evaluate(run, qrels);
    FAIL();
  } catch (const MissingQrels& e) {
    EXPECT_EQ(e.query_id(), "qX");
  }
}

TEST(EvalTest, JudgedQueryMissingFromRunScoresZero) {
  Qrels qrels = {{"q1", {"a"}}, {"q2", {"b"}}};
  std::vector<RunResult> run = {ranked("q1", {"a"})};
  auto m = evaluate(run, qrels);
  EXPECT_DOUBLE_EQ(m.recall_at_1, 0.5);
  EXPECT_EQ(m.n_queries, 2);
  auto empty = evaluate(std::vector<RunResult>{}, qrels);
  EXPECT_EQ(empty.recall_at_1, 0.0);
  EXPECT_EQ(empty.recall_at_10, 0.0);
  EXPECT_EQ(empty.mrr_at_100, 0.0);
}

TEST(EvalTest, RandomRunProperties) {
  std::mt19937_64 rng(99);
  std::uniform_int_distribution<int> nq(1, 12), ndocs(0, 120), pick(0, 149),
      nrel(1, 3);
  for (int trial = 0; trial < 1000; ++trial) {
    Qrels qrels;
    std::vector<RunResult> run;
    const int queries = nq(rng);
    double r1 = 0, r10 = 0, rr = 0;
    for (int q = 0; q < queries; ++q) {
      const std::string qid = "q" + std::to_string(q);
      std::set<std::string> rel;
      for (int i = nrel(rng); i > 0; --i) rel.insert("d" + std::to_string(pick(rng)));
      qrels[qid] = rel;
      std::vector<std::string> docs;
      std::set<std::string> used;
      for (int i = ndocs(rng); i > 0; --i) {
        auto d = "d" + std::to_string(pick(rng));
        if (used.insert(d).second) docs.push_back(d);
      }
      if (trial % 5 != 0 || q % 2 == 0) run.push_back(ranked(qid, docs));
      const int hit = first_hit(ranked(qid, docs), rel);
      if (trial % 5 == 0 && q % 2 == 1) continue;
      r1 += hit == 1;
      r10 += hit >= 1 && hit <= 10;
      rr += hit >= 1 && hit <= 100 ? 1.0 / hit : 0.0;
    }
    auto m = evaluate(run, qrels);
    EXPECT_NEAR(m.recall_at_1, r1 / queries, 1e-12);
    EXPECT_NEAR(m.recall_at_10, r10 / queries, 1e-12);
    EXPECT_NEAR(m.mrr_at_100, rr / queries, 1e-12);
    EXPECT_LE(m.recall_at_1, m.recall_at_10);
    EXPECT_GE(m.mrr_at_100, m.recall_at_1);
    EXPECT_LE(m.mrr_at_100, recall_at_k(run, qrels, 100));

    auto shuffled = run;
    std::shuffle(shuffled.begin(), shuffled.end(), rng);
    auto p = evaluate(shuffled, qrels);
    EXPECT_NEAR(p.recall_at_1, m.recall_at_1, 1e-12);
    EXPECT_NEAR(p.mrr_at_100, m.mrr_at_100, 1e-12);
  }
}

TEST(EvalTest, EvaluateRunFromFiles) {
  testing::TempDir dir;
  testing::write_file(dir / "run.txt",
                      "q1 Q0 a 1 -0.1 t\nq1 Q0 b 2 -0.2 t\n"
                      "q2 Q0 a 1 -0.1 t\nq2 Q0 b 2 -0.2 t\nq2 Q0 c 3 -0.3 t\n");
  testing::write_file(dir / "qrels.tsv", "q1\ta\nq2\tc\n");
  auto m = evaluate_run(dir / "run.txt", dir / "qrels.tsv");
  EXPECT_DOUBLE_EQ(m.recall_at_1, 0.5);
  EXPECT_DOUBLE_EQ(m.recall_at_10, 1.0);
  EXPECT_NEAR(m.mrr_at_100, 2.0 / 3, 1e-9);
  auto j = m.to_json();
  EXPECT_EQ(j.at("n_queries"), 2);
  EXPECT_TRUE(j.contains("recall@1"));
}

TEST(EvalTest, QrelsErrors) {
  testing::TempDir dir;
  testing::write_file(dir / "bad.tsv", "q1\ta\nq2 b\n");
  try {
    load_qrels(dir / "bad.tsv");
    FAIL();
  } catch (const FormatError& e) {
    EXPECT_EQ(e.line(), 2u);
  }
  testing::write_file(dir / "empty.tsv", "");
  EXPECT_THROW(load_qrels(dir / "empty.tsv"), FormatError);
  EXPECT_THROW(load_qrels(dir / "none.tsv"), IoError);
  testing::write_file(dir / "multi.tsv", "q1\ta\nq1\tb\n");
  EXPECT_EQ(load_qrels(dir / "multi.tsv").at("q1"),
            (std::set<std::string>{"a", "b"}));
}

}  // namespace
}  // namespace fsgr
