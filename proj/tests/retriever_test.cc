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

#include "fsgr/retriever.h"

#include <cmath>
#include <random>
#include <sstream>

#include <gtest/gtest.h>

#include "fsgr/errors.h"
#include "fsgr/mock_lm.h"
#include "testing/fixtures.h"

namespace fsgr {
namespace {

const TokenSpace& chars() {
  static const TokenSpace space = TokenSpace::character();
  return space;
}

TEST(AggregateTest, MaxKeepsBestDocidPerDocument) {
  std::vector<ScoredDocid> hits = {
      {"docA", "a1", -1.0}, {"docA", "a2", -1.2}, {"docB", "b1", -1.5}};
  auto out = aggregate_by_document(hits, 2, Aggregation::kMax);
  ASSERT_EQ(out.size(), 2u);
  EXPECT_EQ(out[0].doc_ref, "docA");
  EXPECT_EQ(out[0].score, -1.0);
  EXPECT_EQ(out[0].best_docid, "a1");
  EXPECT_EQ(out[0].rank, 1);
  EXPECT_EQ(out[1].doc_ref, "docB");
  EXPECT_EQ(out[1].score, -1.5);
  EXPECT_EQ(out[1].rank, 2);
}

TEST(AggregateTest, ShortListIsNotPadded) {
  std::vector<ScoredDocid> hits = {{"docA", "a1", -1.0}, {"docA", "a2", -2.0}};
  EXPECT_EQ(aggregate_by_document(hits, 10, Aggregation::kMax).size(), 1u);
  EXPECT_THROW(aggregate_by_document(hits, 0, Aggregation::kMax),
               std::invalid_argument);
}

TEST(AggregateTest, SumCombinesProbabilities) {
  std::vector<ScoredDocid> hits = {
      {"docA", "a1", std::log(0.3)}, {"docB", "b1", std::log(0.4)},
      {"docA", "a2", std::log(0.2)}};
  auto out = aggregate_by_document(hits, 5, Aggregation::kSum);
  ASSERT_EQ(out.size(), 2u);
  EXPECT_EQ(out[0].doc_ref, "docA");
  EXPECT_NEAR(out[0].score, std::log(0.5), 1e-12);
  EXPECT_EQ(out[0].best_docid, "a1");
}

TEST(AggregateTest, EqualScoresKeepDecoderOrder) {
  std::vector<ScoredDocid> hits = {{"z", "z1", -1.0}, {"a", "a1", -1.0}};
  auto out = aggregate_by_document(hits, 5, Aggregation::kMax);
  EXPECT_EQ(out[0].doc_ref, "z");
}

// Three documents with two docids each; the query steers to doc2.
struct ThreeDocFixture {
  DocIdBank bank{chars().vocab_size(), chars().end()};
  MockLm lm{1};
  const std::string query = "which document is the second one";

  ThreeDocFixture() {
    const std::vector<std::pair<std::string, std::string>> ids = {
        {"doc1", "alpha-one"}, {"doc1", "alpha-uno"}, {"doc2", "beta-two"},
        {"doc2", "beta-dos"},  {"doc3", "gamma-three"}, {"doc3", "gamma-tres"}};
    for (const auto& [doc, id] : ids) {
      bank.insert({id, chars().encode(id), doc, 1});
    }
    lm = MockLm(chars().vocab_size(), MockLm::Hashed{2, 1.0},
                testing::path_rules("Query: " + query + "\nIdentifier:",
                                    chars().encode("beta-two"), chars().end()));
  }
};

TEST(RetrieverTest, SteeredQueryRanksIntendedDocFirst) {
  ThreeDocFixture f;
  Retriever r(f.lm, f.bank, PromptTemplate::docid_default(), {});
  auto run = r.retrieve({"q1", f.query}, 3);
  EXPECT_EQ(run.query_id, "q1");
  ASSERT_EQ(run.ranked.size(), 3u);
  EXPECT_EQ(run.ranked[0].doc_ref, "doc2");
  EXPECT_EQ(run.ranked[0].best_docid, "beta-two");
  for (std::size_t i = 0; i < run.ranked.size(); ++i) {
    EXPECT_EQ(run.ranked[i].rank, static_cast<int>(i) + 1);
    if (i > 0) EXPECT_GE(run.ranked[i - 1].score, run.ranked[i].score);
  }
}

TEST(RetrieverTest, KLimitsOutputAndWidensBeam) {
  ThreeDocFixture f;
  DecodeConfig narrow;
  narrow.beam_width = 1;
  Retriever r(f.lm, f.bank, PromptTemplate::docid_default(), narrow);
  EXPECT_EQ(r.retrieve({"q", f.query}, 1).ranked.size(), 1u);
  // A beam of 1 would yield one document; k=3 widens it.
  EXPECT_EQ(r.retrieve({"q", f.query}, 3).ranked.size(), 3u);
  EXPECT_THROW(r.retrieve({"q", f.query}, 0), std::invalid_argument);
}

TEST(RetrieverTest, AggregationMatchesRawDecoder) {
  std::mt19937_64 rng(31);
  for (int trial = 0; trial < 60; ++trial) {
    auto ids = testing::random_docids(rng, 30, 4, 3, 6);
    DocIdBank bank(chars().vocab_size(), chars().end());
    for (std::size_t i = 0; i < ids.size(); ++i) {
      bank.insert({chars().decode(ids[i]), ids[i],
                   "doc" + std::to_string(i % 8), 1});
    }
    MockLm lm(chars().vocab_size(),
              MockLm::Hashed{static_cast<std::uint64_t>(trial), 4.0});
    DecodeConfig cfg;
    cfg.beam_width = 40;
    Retriever r(lm, bank, PromptTemplate::docid_default(), cfg);
    auto run = r.retrieve({"q", "query text"}, 100);
    auto raw = constrained_beam_search(lm, bank, PromptTemplate::docid_default(),
                                       "query text", cfg);
    std::map<std::string, double> best;
    for (const auto& h : raw) {
      const auto& doc = bank.find(h.tokens)->doc_ref;
      auto [it, fresh] = best.emplace(doc, h.score);
      if (!fresh) it->second = std::max(it->second, h.score);
    }
    ASSERT_EQ(run.ranked.size(), best.size());
    std::set<std::string> seen;
    for (const auto& d : run.ranked) {
      EXPECT_TRUE(seen.insert(d.doc_ref).second);
      EXPECT_TRUE(bank.has_document(d.doc_ref));
      EXPECT_EQ(d.score, best.at(d.doc_ref));
    }
  }
}

TEST(RetrieverTest, RetrieveAllKeepsInputOrder) {
  ThreeDocFixture f;
  Retriever r(f.lm, f.bank, PromptTemplate::docid_default(), {});
  std::vector<Query> qs;
  for (int i = 0; i < 9; ++i) {
    qs.push_back({"q" + std::to_string(i), i == 4 ? f.query : "other " + std::to_string(i)});
  }
  auto serial = r.retrieve_all(qs, 3, 1);
  auto pooled = r.retrieve_all(qs, 3, 4);
  ASSERT_EQ(pooled.size(), qs.size());
  for (std::size_t i = 0; i < qs.size(); ++i) {
    EXPECT_EQ(pooled[i].query_id, qs[i].query_id);
    ASSERT_EQ(pooled[i].ranked.size(), serial[i].ranked.size());
    for (std::size_t j = 0; j < serial[i].ranked.size(); ++j) {
      EXPECT_EQ(pooled[i].ranked[j].doc_ref, serial[i].ranked[j].doc_ref);
    }
  }
  EXPECT_EQ(pooled[4].ranked[0].doc_ref, "doc2");
}

TEST(TrecRunTest, WriteFormat) {
  std::vector<RunResult> runs = {
      {"q1", {{"d1", -0.5, "x", 1}, {"d2", -1.25, "y", 2}}}, {"q2", {}}};
  std::ostringstream out;
  write_trec_run(out, runs, "tag");
  EXPECT_EQ(out.str(),
            "q1 Q0 d1 1 -0.500000 tag\n"
            "q1 Q0 d2 2 -1.250000 tag\n");
}

TEST(TrecRunTest, RoundTripAndErrors) {
  testing::TempDir dir;
  std::vector<RunResult> runs = {
      {"q1", {{"d1", -0.5, "", 1}, {"d2", -1.0, "", 2}}},
      {"q2", {{"d3", -0.25, "", 1}}}};
  write_trec_run(dir / "run.txt", runs, "t");
  auto back = read_trec_run(dir / "run.txt");
  ASSERT_EQ(back.size(), 2u);
  EXPECT_EQ(back[0].query_id, "q1");
  EXPECT_EQ(back[0].ranked[1].doc_ref, "d2");
  EXPECT_EQ(back[0].ranked[1].rank, 2);
  EXPECT_EQ(back[1].ranked[0].score, -0.25);

  testing::write_file(dir / "unsorted.txt",
                      "q1 Q0 b 2 -2 t\nq1 Q0 a 1 -1 t\n");
  auto sorted = read_trec_run(dir / "unsorted.txt");
  EXPECT_EQ(sorted[0].ranked[0].doc_ref, "a");

  testing::write_file(dir / "bad.txt", "q1 Q0 d1 1 -0.5 t\nq1 d1 2\n");
  try {
    read_trec_run(dir / "bad.txt");
    FAIL();
  } catch (const FormatError& e) {
    EXPECT_EQ(e.line(), 2u);
  }
  testing::write_file(dir / "dup.txt", "q1 Q0 d1 1 -1 t\nq1 Q0 d1 2 -2 t\n");
  EXPECT_THROW(read_trec_run(dir / "dup.txt"), FormatError);
  EXPECT_THROW(read_trec_run(dir / "none.txt"), IoError);
}

TEST(QueriesFileTest, Load) {
  testing::TempDir dir;
  testing::write_file(dir / "q.tsv", "q1\twhat is x\nq2\twho is y\n");
  auto qs = load_queries(dir / "q.tsv");
  ASSERT_EQ(qs.size(), 2u);
  EXPECT_EQ(qs[1].query_id, "q2");
  EXPECT_EQ(qs[1].text, "who is y");
  testing::write_file(dir / "bad.tsv", "q1\tx\nno-tab-here\n");
  EXPECT_THROW(load_queries(dir / "bad.tsv"), FormatError);
  testing::write_file(dir / "dup.tsv", "q1\tx\nq1\ty\n");
  EXPECT_THROW(load_queries(dir / "dup.tsv"), FormatError);
}

}  // namespace
}  // namespace fsgr
