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

#include "fsgr/cli.h"

#include <fstream>
#include <iostream>
#include <optional>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "fsgr/config.h"
#include "fsgr/docid_bank.h"
#include "fsgr/errors.h"
#include "fsgr/eval.h"
#include "fsgr/indexing.h"
#include "fsgr/retriever.h"

namespace fsgr::cli {
namespace {

struct Options {
  std::string config;
  std::string mock_lm;
  std::optional<int> workers;
  std::optional<int> beam_width;
  std::optional<int> k;

  std::string corpus;
  std::string pseudo_queries;
  std::string bank;
  std::string collisions_out;
  std::string stats_out;

  std::string queries;
  std::string run;
  std::string run_tag;

  std::string qrels;
  std::string report_out;

  std::vector<std::string> docs;
  std::string other;
  std::string out;
  std::string removed_out;
};

AppConfig resolve_config(const Options& opt) {
  AppConfig cfg = opt.config.empty() ? AppConfig{} : AppConfig::load(opt.config);
  cfg.apply_environment();
  if (!opt.mock_lm.empty()) cfg.mock_lm = opt.mock_lm;
  if (opt.workers) cfg.workers = *opt.workers;
  if (opt.beam_width) cfg.decode.beam_width = *opt.beam_width;
  if (opt.k) cfg.k = *opt.k;
  if (!opt.run_tag.empty()) cfg.run_tag = opt.run_tag;
  auto override_path = [](const std::string& flag, std::filesystem::path& p) {
    if (!flag.empty()) p = flag;
  };
  override_path(opt.corpus, cfg.paths.corpus);
  override_path(opt.pseudo_queries, cfg.paths.pseudo_queries);
  override_path(opt.bank, cfg.paths.bank);
  override_path(opt.queries, cfg.paths.queries);
  override_path(opt.run, cfg.paths.run);
  override_path(opt.qrels, cfg.paths.qrels);
  cfg.indexing.workers = cfg.workers;
  cfg.validate();
  return cfg;
}

const std::filesystem::path& require(const std::filesystem::path& p,
                                     const char* flag) {
  if (p.empty()) {
    throw ConfigError(std::string("missing required path: ") + flag);
  }
  return p;
}

void require_exists(const std::filesystem::path& p, const char* what) {
  if (!std::filesystem::exists(p)) {
    throw IoError(std::string(what) + " not found: " + p.string());
  }
}

void write_json(const std::filesystem::path& path, const nlohmann::json& j) {
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw IoError("cannot write " + path.string());
  out << j.dump(2) << '\n';
  if (!out) throw IoError("failed writing " + path.string());
}

int cmd_index(const Options& opt, std::ostream& out, std::ostream& err) {
  const AppConfig cfg = resolve_config(opt);
  const auto& corpus_path = require(cfg.paths.corpus, "--corpus");
  const auto& bank_path = require(cfg.paths.bank, "--bank");
  require_exists(corpus_path, "corpus file");

  auto space = make_token_space(cfg.tokenizer);
  auto lm = make_language_model(cfg, space);
  const auto corpus = load_corpus(corpus_path);

  LmPseudoQuerySource generated(*lm, *space, cfg.indexing.max_query_tokens);
  std::optional<FilePseudoQuerySource> from_file;
  const PseudoQuerySource* source = &generated;
  if (!cfg.paths.pseudo_queries.empty()) {
    require_exists(cfg.paths.pseudo_queries, "pseudo-queries file");
    from_file.emplace(load_pseudo_queries(cfg.paths.pseudo_queries),
                      &generated);
    source = &*from_file;
  }

  Indexer indexer(*lm, *space, cfg.prompt, cfg.indexing);
  const auto result = indexer.index_corpus(corpus, *source);

  result.bank.save(bank_path);
  const std::filesystem::path collisions_path =
      opt.collisions_out.empty() ? bank_path.string() + ".collisions.json"
                                 : opt.collisions_out;
  const std::filesystem::path stats_path =
      opt.stats_out.empty() ? bank_path.string() + ".stats.json"
                            : opt.stats_out;
  write_json(collisions_path, result.collisions.to_json());
  write_json(stats_path, result.stats.to_json());

  const auto& s = result.stats;
  out << "indexed " << s.documents << " documents: " << s.docids_kept
      << " docids kept, " << s.collisions << " collisions, "
      << s.orphans_remaining << " orphaned, " << s.failed_docs.size()
      << " failed\n";
  if (s.orphans_remaining > 0 || !s.failed_docs.empty()) {
    err << "error: " << s.orphans_remaining << " document(s) orphaned and "
        << s.failed_docs.size()
        << " failed; they cannot be retrieved (see " << stats_path.string()
        << ")\n";
    return kDataMismatch;
  }
  return kOk;
}

int cmd_retrieve(const Options& opt, std::ostream& out, std::ostream&) {
  const AppConfig cfg = resolve_config(opt);
  const auto& bank_path = require(cfg.paths.bank, "--bank");
  const auto& queries_path = require(cfg.paths.queries, "--queries");
  const auto& run_path = require(cfg.paths.run, "--out");
  require_exists(bank_path, "bank file");
  require_exists(queries_path, "queries file");

  auto space = make_token_space(cfg.tokenizer);
  const auto bank = DocIdBank::load(bank_path, *space);
  const auto queries = load_queries(queries_path);
  std::vector<RunResult> runs;
  if (!queries.empty()) {
    auto lm = make_language_model(cfg, space);
    Retriever retriever(*lm, bank, cfg.prompt, cfg.decode, cfg.aggregation);
    runs = retriever.retrieve_all(queries, cfg.k, cfg.workers);
  }
  if (run_path == "-") {
    write_trec_run(out, runs, cfg.run_tag);
  } else {
    write_trec_run(run_path, runs, cfg.run_tag);
  }
  return kOk;
}

int cmd_eval(const Options& opt, std::ostream& out, std::ostream&) {
  const AppConfig cfg = resolve_config(opt);
  const auto& run_path = require(cfg.paths.run, "--run");
  const auto& qrels_path = require(cfg.paths.qrels, "--qrels");
  require_exists(run_path, "run file");
  require_exists(qrels_path, "qrels file");
  const auto report = evaluate_run(run_path, qrels_path).to_json();
  if (!opt.report_out.empty()) write_json(opt.report_out, report);
  out << report.dump(2) << '\n';
  return kOk;
}

DocIdBank load_bank(const AppConfig& cfg, const std::filesystem::path& path) {
  require_exists(path, "bank file");
  return DocIdBank::load(path, *make_token_space(cfg.tokenizer));
}

int cmd_bank_stats(const Options& opt, std::ostream& out, std::ostream&) {
  const AppConfig cfg = resolve_config(opt);
  const auto bank = load_bank(cfg, require(cfg.paths.bank, "--bank"));
  out << bank.stats().to_json().dump(2) << '\n';
  return kOk;
}

int cmd_bank_remove(const Options& opt, std::ostream& out, std::ostream&) {
  const AppConfig cfg = resolve_config(opt);
  const auto& bank_path = require(cfg.paths.bank, "--bank");
  auto bank = load_bank(cfg, bank_path);
  DocIdBank removed(bank.vocab_size(), bank.end_token());
  std::size_t count = 0;
  const auto all = bank.entries();
  for (const auto& doc : opt.docs) {
    for (const auto& entry : all) {
      if (entry.doc_ref == doc) removed.insert(entry);
    }
    count += bank.remove_document(doc);
  }
  const std::filesystem::path target =
      opt.out.empty() ? bank_path : std::filesystem::path(opt.out);
  bank.save(target);
  if (!opt.removed_out.empty()) removed.save(opt.removed_out);
  out << "removed " << count << " docid(s)\n";
  return kOk;
}

int cmd_bank_merge(const Options& opt, std::ostream& out, std::ostream&) {
  const AppConfig cfg = resolve_config(opt);
  auto bank = load_bank(cfg, require(cfg.paths.bank, "--bank"));
  if (opt.other.empty()) throw ConfigError("missing required path: --other");
  if (opt.out.empty()) throw ConfigError("missing required path: --out");
  const auto other = load_bank(cfg, opt.other);
  const auto report = bank.merge(other);
  bank.save(opt.out);
  out << report.to_json().dump(2) << '\n';
  return kOk;
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out,
        std::ostream& err) {
  Options opt;
  CLI::App app{"Few-shot generative retrieval over an LLM-minted docid bank"};
  app.name(args.empty() ? "fsgr" : args.front());
  app.require_subcommand(1);
  app.fallthrough();
  app.add_option("--config", opt.config, "JSON config file");
  app.add_option("--mock-lm", opt.mock_lm,
                 "Use a mock LM table (JSON) instead of the HTTP endpoint");
  app.add_option("--workers", opt.workers, "Worker threads");
  app.add_option("--beam-width", opt.beam_width, "Decoder beam width");
  app.add_option("--k", opt.k, "Documents returned per query");

  auto* index = app.add_subcommand("index", "Mint docids for a corpus and build the bank");
  index->add_option("--corpus", opt.corpus, "Corpus JSONL {doc_id, text}");
  index->add_option("--pseudo-queries", opt.pseudo_queries,
                    "Pseudo-query JSONL {doc_id, query}; LM-generated when absent");
  index->add_option("--bank", opt.bank, "Output bank file");
  index->add_option("--collisions", opt.collisions_out,
                    "Collision report JSON (default <bank>.collisions.json)");
  index->add_option("--stats", opt.stats_out,
                    "Indexing stats JSON (default <bank>.stats.json)");

  auto* retrieve = app.add_subcommand("retrieve", "Rank documents for queries");
  retrieve->add_option("--bank", opt.bank, "Bank file");
  retrieve->add_option("--queries", opt.queries, "Queries TSV {query_id, text}");
  retrieve->add_option("--out", opt.run, "Output TREC run file ('-' for stdout)");
  retrieve->add_option("--run-tag", opt.run_tag, "Run tag column");

  auto* eval = app.add_subcommand("eval", "Score a run: Recall@1, Recall@10, MRR@100");
  eval->add_option("--run", opt.run, "TREC run file");
  eval->add_option("--qrels", opt.qrels, "Qrels TSV {query_id, doc_ref}");
  eval->add_option("--out", opt.report_out, "Also write the report here");

  auto* bank = app.add_subcommand("bank", "Inspect or edit a bank file");
  bank->require_subcommand(1);
  auto* stats = bank->add_subcommand("stats", "Print bank statistics");
  stats->add_option("--bank", opt.bank, "Bank file");
  auto* remove = bank->add_subcommand("remove-doc", "Drop every docid of documents");
  remove->add_option("--bank", opt.bank, "Bank file");
  remove->add_option("--doc", opt.docs, "Document id (repeatable)")->required();
  remove->add_option("--out", opt.out, "Output bank (default: rewrite --bank)");
  remove->add_option("--removed-out", opt.removed_out,
                     "Write the removed docids as a bank of their own");
  auto* merge = bank->add_subcommand("merge", "Union two banks, dropping collisions");
  merge->add_option("--bank", opt.bank, "First bank");
  merge->add_option("--other", opt.other, "Second bank");
  merge->add_option("--out", opt.out, "Merged bank");

  std::vector<const char*> argv;
  for (const auto& a : args) argv.push_back(a.c_str());
  if (argv.empty()) argv.push_back("fsgr");
  try {
    app.parse(static_cast<int>(argv.size()), argv.data());
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kOk : kConfig;
  }

  try {
    if (index->parsed()) return cmd_index(opt, out, err);
    if (retrieve->parsed()) return cmd_retrieve(opt, out, err);
    if (eval->parsed()) return cmd_eval(opt, out, err);
    if (stats->parsed()) return cmd_bank_stats(opt, out, err);
    if (remove->parsed()) return cmd_bank_remove(opt, out, err);
    if (merge->parsed()) return cmd_bank_merge(opt, out, err);
    err << "error: no command\n";
    return kConfig;
  } catch (const ConfigError& e) {
    err << "config error: " << e.what() << '\n';
    return kConfig;
  } catch (const IoError& e) {
    err << "I/O error: " << e.what() << '\n';
    return kConfig;
  } catch (const TransportError& e) {
    err << "LM transport error: " << e.what() << '\n';
    return kTransport;
  } catch (const ProtocolError& e) {
    err << "LM protocol error: " << e.what() << '\n';
    return kTransport;
  } catch (const Error& e) {
    err << "data error: " << e.what() << '\n';
    return kDataMismatch;
  } catch (const std::exception& e) {
    err << "internal error: " << e.what() << '\n';
    return kInternal;
  }
}

}  // namespace fsgr::cli
