// Copyright 2026 The cotrec Authors.
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

#include "cotrec/pipeline.h"

#include <fcntl.h>
#include <signal.h>
#include <unistd.h>

#include <algorithm>
#include <cerrno>
#include <cstring>
#include <map>
#include <numeric>
#include <ostream>

#include "cotrec/errors.h"
#include "cotrec/io.h"
#include "cotrec/projection.h"
#include "cotrec/text.h"

namespace cotrec {
namespace {

namespace fs = std::filesystem;

constexpr std::uint64_t kHeadSalt = 1000;

const std::vector<std::pair<Stage, const char*>>& stage_names() {
  static const std::vector<std::pair<Stage, const char*>> names = {
      {Stage::kPrepare, "prepare"}, {Stage::kTrainCf, "train-cf"},
      {Stage::kTrainAlign, "train-align"}, {Stage::kCot, "cot"},
      {Stage::kTrainProj, "train-proj"}, {Stage::kEval, "eval"},
      {Stage::kSweep, "sweep"}, {Stage::kReport, "report"},
  };
  return names;
}

Rng stage_rng(const RunConfig& cfg, Stage stage) {
  return Rng(cfg.seed).fork(static_cast<std::uint64_t>(stage) + 1);
}

class OutputLock {
 public:
  explicit OutputLock(fs::path path) : path_(std::move(path)) {
    int fd = ::open(path_.c_str(), O_CREAT | O_EXCL | O_WRONLY, 0644);
    if (fd < 0 && errno == EEXIST && owner_is_gone()) {
      std::error_code ec;
      fs::remove(path_, ec);
      fd = ::open(path_.c_str(), O_CREAT | O_EXCL | O_WRONLY, 0644);
    }
    if (fd < 0) {
      if (errno == EEXIST) {
        throw DependencyError("output directory is in use: lock file '" + path_.string() +
                              "' exists");
      }
      throw DependencyError("cannot create lock file '" + path_.string() +
                            "': " + std::strerror(errno));
    }
    const std::string pid = std::to_string(::getpid()) + "\n";
    [[maybe_unused]] auto n = ::write(fd, pid.data(), pid.size());
    ::close(fd);
  }
  ~OutputLock() {
    std::error_code ec;
    fs::remove(path_, ec);
  }
  OutputLock(const OutputLock&) = delete;
  OutputLock& operator=(const OutputLock&) = delete;

 private:
  // A lock whose writer process no longer exists is stale.
  bool owner_is_gone() const {
    try {
      const int pid = std::stoi(read_file(path_));
      return pid > 0 && ::kill(pid, 0) != 0 && errno == ESRCH;
    } catch (const std::exception&) {
      return false;
    }
  }

  fs::path path_;
};

struct Context {
  Stage stage;
  const RunConfig& cfg;
  const RunOptions& opts;
  std::string digest;
  StageResult result;

  fs::path at(const char* name) const { return cfg.paths.out / name; }

  std::string header(const std::string& what) const {
    return "# cotrec " + what + "\n# config " + digest + "\n# seed " + std::to_string(cfg.seed) +
           "\n";
  }

  void log(const std::string& line) const {
    if (opts.log) *opts.log << line << '\n';
  }

  void need(const char* name, Stage producer) const {
    if (!fs::exists(at(name))) {
      throw DependencyError(to_string(stage) + " requires " + name + "; run '" +
                            to_string(producer) + "' first");
    }
  }

  void commit(const char* name, const std::string& content) {
    const fs::path path = at(name);
    if (fs::exists(path)) {
      if (read_file(path) == content) {
        result.unchanged.push_back(path);
        return;
      }
      if (!opts.force) {
        throw ConfigError("artifact '" + path.string() +
                          "' exists with different content; pass --force to replace it");
      }
    }
    write_file_atomic(path, content);
    result.written.push_back(path);
  }

  void commit_checkpoint(const char* name, Checkpoint ckpt) {
    ckpt.set_meta("config_digest", digest);
    ckpt.set_meta("seed", std::to_string(cfg.seed));
    commit(name, serialize_checkpoint(ckpt));
  }
};

std::vector<std::string_view> data_lines(std::string_view text) {
  std::vector<std::string_view> out;
  for (std::string_view line : split(text, '\n')) {
    if (line.empty() || line.front() == '#') continue;
    out.push_back(line);
  }
  return out;
}

std::string join_names(std::span<const int> items, const std::vector<std::string>& names) {
  std::string out;
  for (std::size_t i = 0; i < items.size(); ++i) out += (i ? " " : "") + names[items[i]];
  return out;
}

std::vector<std::string> names_of(std::span<const int> items, const std::vector<std::string>& names) {
  std::vector<std::string> out;
  for (int q : items) out.push_back(names[q]);
  return out;
}

SemanticStore require_embeddings(const Context& ctx) {
  if (ctx.cfg.paths.embeddings.empty()) {
    throw ConfigError("paths.embeddings: required by " + to_string(ctx.stage));
  }
  return load_embeddings(ctx.cfg.paths.embeddings);
}

CfModel load_cf(const Context& ctx) {
  ctx.need(artifact::kCf, Stage::kTrainCf);
  return CfModel::from_checkpoint(read_checkpoint(ctx.at(artifact::kCf)));
}

AlignmentNetwork load_align(const Context& ctx) {
  ctx.need(artifact::kAlign, Stage::kTrainAlign);
  return AlignmentNetwork::from_checkpoint(read_checkpoint(ctx.at(artifact::kAlign)));
}

std::vector<CotRecord> load_records(const Context& ctx) {
  ctx.need(artifact::kCotRecords, Stage::kCot);
  return parse_cot_records(read_file(ctx.at(artifact::kCotRecords)));
}

SurrogateHead make_head(const RunConfig& cfg, const Catalog& catalog) {
  return SurrogateHead(build_vocabulary(catalog), cfg.token_dim,
                       Rng(cfg.seed).fork(kHeadSalt).next_u64());
}

ProjectionDims projection_dims(const RunConfig& cfg, int collab_dim, int latent_dim) {
  ProjectionDims dims;
  dims.collab_dim = collab_dim;
  dims.latent_dim = latent_dim;
  dims.semantic_dim = kSemanticDim;
  dims.token_dim = cfg.token_dim;
  dims.hidden = cfg.proj_hidden;
  return dims;
}

std::map<std::string, int> index_by_name(const std::vector<std::string>& names) {
  std::map<std::string, int> out;
  for (int i = 0; i < static_cast<int>(names.size()); ++i) out.emplace(names[i], i);
  return out;
}

// The CoT stage reasons about the last training item given the rest.
std::span<const int> cot_history(const UserSplit& u) {
  return std::span<const int>(u.train).first(u.train.size() - 1);
}

std::vector<ProjectionCandidate> candidates_for(int target, const UserSplit& u, int count,
                                                const PreparedData& data,
                                                const UnifiedScorer& scorer, Rng& rng) {
  std::vector<int> items{target};
  const std::vector<int> full = u.full();
  for (int i = 1; i < count; ++i) items.push_back(sample_negative(full, data.num_items(), rng));
  std::vector<ProjectionCandidate> out;
  for (int q : items) {
    const std::string& id = data.item_ids[q];
    out.push_back({id, data.catalog.at(id).title, scorer.latents().row(q).transpose()});
  }
  return out;
}

// ---------------------------------------------------------------- prepare

void run_prepare(Context& ctx) {
  const RunConfig& cfg = ctx.cfg;
  InteractionLog raw = load_interactions(cfg.paths.interactions, cfg.paths.catalog);
  InteractionLog log = filter_dataset(raw, cfg.min_user_events, cfg.min_item_popularity);
  SequenceSet seqs = build_sequences(log);
  SplitDataset split = leave_one_out_split(seqs, &log.users);
  ColdWarmPartition part = partition_cold_warm(log, cfg.cold_fraction);

  std::string items = ctx.header("items") + "# index\titem\tfrequency\tcohort\n";
  for (int q = 0; q < log.items.size(); ++q) {
    const char* cohort = part.is_warm(q) ? "warm" : part.is_cold(q) ? "cold" : "middle";
    items += std::to_string(q) + "\t" + log.items.name(q) + "\t" +
             std::to_string(part.frequency[q]) + "\t" + cohort + "\n";
  }
  std::string sequences = ctx.header("sequences") + "# user\titems\n";
  for (const UserSequence& s : seqs) {
    sequences += log.users.name(s.user) + "\t" + join_names(s.items, log.items.names()) + "\n";
  }
  std::string split_text = ctx.header("split") + "# user\ttrain\tvalidation\ttest\n";
  for (const UserSplit& u : split.users) {
    split_text += log.users.name(u.user) + "\t" + join_names(u.train, log.items.names()) + "\t" +
                  log.items.name(u.validation) + "\t" + log.items.name(u.test) + "\n";
  }
  ctx.commit(artifact::kItems, items);
  ctx.commit(artifact::kSequences, sequences);
  ctx.commit(artifact::kSplit, split_text);

  char buf[256];
  std::snprintf(buf, sizeof(buf),
                "raw_events %zu\nevents %zu\nusers %d\nitems %d\nwarm_items %zu\ncold_items %zu\n",
                raw.events.size(), log.events.size(), log.users.size(), log.items.size(),
                part.warm.size(), part.cold.size());
  ctx.commit(artifact::kPrepareReport, ctx.header("prepare report") + buf);
  ctx.result.summary = buf;
}

// ---------------------------------------------------------------- train-cf

void run_train_cf(Context& ctx) {
  const RunConfig& cfg = ctx.cfg;
  PreparedData data = load_prepared(cfg);
  SplitDataset train_split = data.split;
  std::vector<int> excluded;
  if (cfg.hold_out_cold) {
    excluded = data.partition.cold;
    for (UserSplit& u : train_split.users) {
      std::erase_if(u.train, [&](int q) { return data.partition.is_cold(q); });
    }
  }
  Rng rng = stage_rng(cfg, ctx.stage);
  Rng inst_rng = rng.fork(1);
  Rng train_rng = rng.fork(2);
  auto instances = build_training_instances(train_split, data.num_items(), cfg.negatives,
                                            inst_rng, excluded);
  if (instances.empty()) throw DataError("no CF training instances");
  ctx.log("train-cf: " + std::to_string(instances.size()) + " instances");
  CfModel model = train_cf(instances, cfg.cf, data.num_items(), data.item_ids, train_rng);

  std::string report = ctx.header("cf report");
  report += "instances " + std::to_string(instances.size()) + "\n";
  int trained = 0;
  for (int q = 0; q < model.num_items(); ++q) trained += model.knows(q) ? 1 : 0;
  report += "trained_items " + std::to_string(trained) + "\n";
  report += "held_out_items " + std::to_string(model.num_items() - trained) + "\n";
  for (std::size_t e = 0; e < model.epoch_losses().size(); ++e) {
    report += "epoch " + std::to_string(e + 1) + " loss " + format_double(model.epoch_losses()[e]) +
              "\n";
  }
  report += "model_digest " + model.digest() + "\n";
  ctx.commit_checkpoint(artifact::kCf, model.to_checkpoint());
  ctx.commit(artifact::kCfReport, report);
  ctx.result.summary = report;
}

// ---------------------------------------------------------------- train-align

void run_train_align(Context& ctx) {
  const RunConfig& cfg = ctx.cfg;
  PreparedData data = load_prepared(cfg);
  CfModel cf = load_cf(ctx);
  SemanticStore store = require_embeddings(ctx);

  std::vector<std::string> known_ids;
  std::vector<int> unknown;
  for (int q = 0; q < data.num_items(); ++q) {
    if (cf.knows(q)) {
      known_ids.push_back(data.item_ids[q]);
    } else {
      unknown.push_back(q);
    }
  }
  if (auto missing = store.missing(known_ids); !missing.empty()) {
    throw DataError("no semantic embedding for trained item '" + missing.front() + "' (" +
                    std::to_string(missing.size()) + " missing)");
  }

  Rng rng = stage_rng(cfg, ctx.stage);
  Rng neg_rng = rng.fork(1);
  Rng init_rng = rng.fork(2);
  Rng train_rng = rng.fork(3);
  const int d = cf.config().embed_dim;
  std::vector<AlignmentExample> examples;
  for (const UserSplit& u : data.split.users) {
    std::vector<int> known;
    for (int q : u.train) {
      if (cf.knows(q)) known.push_back(q);
    }
    if (known.empty()) continue;
    AlignmentExample ex;
    ex.group.collab.resize(static_cast<Eigen::Index>(known.size()), d);
    ex.group.semantic.resize(static_cast<Eigen::Index>(known.size()), kSemanticDim);
    for (std::size_t i = 0; i < known.size(); ++i) {
      ex.group.collab.row(i) = cf.item_embedding(known[i])->transpose();
      ex.group.semantic.row(i) = store.at(data.item_ids[known[i]]).transpose();
    }
    if (known.size() >= 2) {
      ex.has_triple = true;
      ex.user = cf.user_representation(std::span<const int>(known).first(known.size() - 1));
      ex.positive = *cf.item_embedding(known.back());
      ex.negative =
          *cf.item_embedding(sample_negative(u.full(), data.num_items(), neg_rng, unknown));
    }
    examples.push_back(std::move(ex));
  }
  if (examples.empty()) throw DataError("no alignment examples");
  AlignmentNetwork net =
      init_alignment_network(d, init_rng, cfg.alpha, cfg.beta, kSemanticDim, cfg.latent_dim);
  ctx.log("train-align: " + std::to_string(examples.size()) + " sequences");
  AlignmentTrainResult res = train_alignment(std::move(net), examples, cfg.align, train_rng);

  std::string report = ctx.header("alignment report");
  report += "sequences " + std::to_string(examples.size()) + "\n";
  auto row = [](const std::string& label, const LossBreakdown& l) {
    return label + " align " + format_double(l.align) + " reconstruction " +
           format_double(l.reconstruction) + " recommendation " + format_double(l.recommendation) +
           " total " + format_double(l.total()) + "\n";
  };
  report += row("initial", res.initial_loss);
  for (std::size_t e = 0; e < res.epoch_losses.size(); ++e) {
    report += row("epoch " + std::to_string(e + 1), res.epoch_losses[e]);
  }
  report += "network_digest " + res.net.digest() + "\n";
  ctx.commit_checkpoint(artifact::kAlign, res.net.to_checkpoint());
  ctx.commit(artifact::kAlignReport, report);
  ctx.result.summary = report;
}

// ---------------------------------------------------------------- cot

std::unique_ptr<GenerationAdapter> make_adapter(const RunConfig& cfg) {
  if (cfg.cot_adapter == "remote") return std::make_unique<RemoteAdapter>(cfg.remote);
  FixtureCorpus corpus;
  if (!cfg.paths.cot_fixtures.empty()) corpus = parse_cot_fixtures(read_file(cfg.paths.cot_fixtures));
  return std::make_unique<FixtureAdapter>(std::move(corpus), cfg.cot_template_fallback);
}

void run_cot(Context& ctx) {
  const RunConfig& cfg = ctx.cfg;
  PreparedData data = load_prepared(cfg);
  CfModel cf = load_cf(ctx);
  auto adapter = make_adapter(cfg);

  Rng rng = stage_rng(cfg, ctx.stage);
  Rng pick_rng = rng.fork(1);
  Rng neg_rng = rng.fork(2);
  std::vector<std::size_t> users(data.split.users.size());
  std::iota(users.begin(), users.end(), std::size_t{0});
  pick_rng.shuffle(std::span<std::size_t>(users));
  users.resize(std::min<std::size_t>(users.size(), static_cast<std::size_t>(cfg.cot_samples)));
  std::sort(users.begin(), users.end());

  std::vector<CotRecord> records;
  for (std::size_t ui : users) {
    const UserSplit& u = data.split.users[ui];
    const std::vector<int> full = u.full();
    std::vector<int> known;
    for (int q : cot_history(u)) {
      if (cf.knows(q)) known.push_back(q);
    }
    std::optional<VectorXd> scores;
    if (!known.empty()) scores = cf.next_item_scores(known);
    const std::vector<std::string> history = names_of(cot_history(u), data.item_ids);
    const int positive = u.train.back();
    const int negative = sample_negative(full, data.num_items(), neg_rng);
    for (auto [target, label] : {std::pair{positive, 1}, std::pair{negative, 0}}) {
      std::vector<int> cands{target};
      for (int i = 1; i < cfg.cot_candidates; ++i) {
        cands.push_back(sample_negative(full, data.num_items(), neg_rng));
      }
      double prior = 0.5;
      if (scores && cf.knows(target)) prior = score_percentile(*scores, target);
      InstructionInstance inst = build_instruction_instance(
          data.user_ids[ui], history, data.item_ids[target], verbalize_prior(prior), data.catalog,
          static_cast<std::size_t>(cfg.k_prompt), label);
      int top = -1;
      for (int q : cands) {
        inst.candidates.push_back({data.item_ids[q], data.catalog.at(data.item_ids[q]).title});
        if (scores && cf.knows(q) &&
            (top < 0 || (*scores)(q) > (*scores)(top) || ((*scores)(q) == (*scores)(top) && q < top))) {
          top = q;
        }
      }
      if (top >= 0) inst.cf_top = data.item_ids[top];
      std::string cot = generate_cot(*adapter, inst);
      records.push_back(score_cot(inst, std::move(cot), fallback_embed, cfg.cot_weights,
                                  cfg.cot_threshold));
    }
  }
  FilterResult kept = filter_cots(records, cfg.cot_threshold);
  double mean = 0.0, lo = 1.0;
  for (const CotRecord& r : records) {
    mean += r.score;
    lo = std::min(lo, r.score);
  }
  mean /= static_cast<double>(records.size());
  std::string report = ctx.header("cot report");
  report += "records " + std::to_string(records.size()) + "\n";
  report += "retained " + std::to_string(kept.retained.size()) + "\n";
  report += "threshold " + format_double(cfg.cot_threshold) + "\n";
  report += "coverage " + format_double(kept.coverage) + "\n";
  report += "mean_score " + format_double(mean) + "\n";
  report += "min_score " + format_double(lo) + "\n";
  report += "adapter " + cfg.cot_adapter + " calls " + std::to_string(adapter->calls()) + "\n";
  ctx.commit(artifact::kCotRecords, ctx.header("cot records") + serialize_cot_records(records));
  ctx.commit(artifact::kCotReport, report);
  ctx.result.summary = report;
}

// ---------------------------------------------------------------- train-proj

struct ProjectionSetup {
  PreparedData data;
  CfModel cf;
  AlignmentNetwork net;
  SemanticStore store;
  std::unique_ptr<UnifiedScorer> scorer;
  std::unique_ptr<SurrogateHead> head;
};

ProjectionSetup load_projection_setup(const Context& ctx) {
  ProjectionSetup s{load_prepared(ctx.cfg), load_cf(ctx), load_align(ctx),
                    require_embeddings(ctx), nullptr, nullptr};
  s.scorer = std::make_unique<UnifiedScorer>(s.cf, s.net, s.store, s.data.item_ids);
  s.head = std::make_unique<SurrogateHead>(make_head(ctx.cfg, s.data.catalog));
  return s;
}

std::vector<ProjectionExample> projection_examples(const ProjectionSetup& s,
                                                   std::span<const CotRecord> records,
                                                   const RunConfig& cfg, Rng& rng) {
  const auto user_index = index_by_name(s.data.user_ids);
  const auto item_index = index_by_name(s.data.item_ids);
  std::vector<ProjectionExample> out;
  for (const CotRecord& r : records) {
    if (!r.retained || r.instance.label != 1) continue;
    const UserSplit& u = s.data.split.users.at(user_index.at(r.instance.user));
    const int target = item_index.at(r.instance.target);
    ProjectionExample ex;
    ex.user = s.scorer->user_vector(cot_history(u));
    ex.candidates = candidates_for(target, u, cfg.proj_candidates, s.data, *s.scorer, rng);
    ex.cot = CotSignal{fallback_embed(r.cot), r.score};
    ex.target_tokens = word_tokens(s.data.catalog.at(r.instance.target).title);
    out.push_back(std::move(ex));
  }
  return out;
}

ProjectionTrainResult train_projection_on(const ProjectionSetup& s,
                                          std::span<const CotRecord> records,
                                          const RunConfig& cfg, std::size_t* n_examples) {
  Rng rng = stage_rng(cfg, Stage::kTrainProj);
  Rng cand_rng = rng.fork(1);
  Rng init_rng = rng.fork(2);
  Rng train_rng = rng.fork(3);
  auto examples = projection_examples(s, records, cfg, cand_rng);
  if (n_examples) *n_examples = examples.size();
  if (examples.empty()) throw DataError("no retained positive CoT records to train projections on");
  ProjectionStack stack = init_projection_stack(
      projection_dims(cfg, s.cf.config().embed_dim, s.net.latent_dim()), init_rng);
  return train_projections(std::move(stack), examples, cfg.proj, *s.head, train_rng);
}

void run_train_proj(Context& ctx) {
  const RunConfig& cfg = ctx.cfg;
  std::vector<CotRecord> records = load_records(ctx);
  ProjectionSetup s = load_projection_setup(ctx);
  std::size_t n = 0;
  ProjectionTrainResult res = train_projection_on(s, records, cfg, &n);
  Checkpoint ckpt = res.stack.to_checkpoint();
  ckpt.set_meta("head_digest", s.head->digest());
  std::string report = ctx.header("projection report");
  report += "examples " + std::to_string(n) + "\n";
  report += "initial_loss " + format_double(res.initial_loss) + "\n";
  for (std::size_t e = 0; e < res.epoch_losses.size(); ++e) {
    report += "epoch " + std::to_string(e + 1) + " loss " + format_double(res.epoch_losses[e]) +
              "\n";
  }
  report += "stack_digest " + res.stack.digest() + "\n";
  ctx.commit_checkpoint(artifact::kProj, ckpt);
  ctx.commit(artifact::kProjReport, report);
  ctx.result.summary = report;
}

// ---------------------------------------------------------------- eval

Ranker surrogate_ranker(const ProjectionSetup& s, const ProjectionStack& stack) {
  return [&s, &stack](const EvalQuery& q) {
    std::vector<ProjectionCandidate> cands;
    for (int item : q.pool) {
      const std::string& id = s.data.item_ids[item];
      cands.push_back({id, s.data.catalog.at(id).title, s.scorer->latents().row(item).transpose()});
    }
    const VectorXd x = s.scorer->user_vector(q.history);
    std::vector<RankedCandidate> ranked = rank_candidates(stack, *s.head, x, nullptr, cands);
    std::vector<int> out;
    // rank_candidates keeps duplicates, so map names back through the pool.
    std::map<std::string, int> lookup;
    for (int item : q.pool) lookup.emplace(s.data.item_ids[item], item);
    for (const RankedCandidate& r : ranked) out.push_back(lookup.at(r.item));
    return out;
  };
}

Ranker unified_ranker(const UnifiedScorer& scorer, bool aligned) {
  return [&scorer, aligned](const EvalQuery& q) { return scorer.rank(q, aligned); };
}

struct ExplanationInputs {
  FixtureCorpus references;
  std::unique_ptr<FixtureAdapter> adapter;
};

ExplanationSource explanation_source(const ProjectionSetup& s, const ProjectionStack& stack,
                                     ExplanationInputs& in) {
  return [&s, &stack, &in](int user, int item) -> std::optional<std::pair<std::string, std::string>> {
    const std::string& uid = s.data.user_ids[user];
    const std::string& iid = s.data.item_ids[item];
    auto ref = in.references.find({uid, iid});
    if (ref == in.references.end()) return std::nullopt;
    const UserSplit& u = s.data.split.users[user];
    std::vector<int> history = u.train;
    history.push_back(u.validation);
    const VectorXd x = s.scorer->user_vector(history);
    const VectorXd z = s.scorer->latents().row(item).transpose();
    const std::vector<ProjectionCandidate> cands{{iid, s.data.catalog.at(iid).title, z}};
    PromptBundle bundle = build_bundle(stack, x, cands, nullptr);
    ExplanationReply reply = request_explanation(stack, z, nullptr, bundle, *in.adapter, uid, iid);
    return std::make_pair(reply.explanation, ref->second);
  };
}

std::string cohort_section(const ColdWarmReport& cw, Protocol p) {
  try {
    return serialize_report(cw.cohort(p));
  } catch (const CohortError&) {
    return "empty_cohort " + to_string(p) + "\n";
  }
}

void run_eval(Context& ctx) {
  const RunConfig& cfg = ctx.cfg;
  ProjectionSetup s = load_projection_setup(ctx);
  const bool explain = !cfg.paths.explanations.empty() && !cfg.paths.references.empty();
  std::optional<ProjectionStack> stack;
  if (cfg.ranker == "surrogate" || explain) {
    ctx.need(artifact::kProj, Stage::kTrainProj);
    stack = ProjectionStack::from_checkpoint(read_checkpoint(ctx.at(artifact::kProj)));
  }
  Ranker ranker = cfg.ranker == "surrogate" ? surrogate_ranker(s, *stack)
                                            : unified_ranker(*s.scorer, cfg.ranker == "aligned");
  ExplanationInputs inputs;
  ExplanationSource explanations;
  if (explain) {
    inputs.references = parse_text_fixtures(read_file(cfg.paths.references));
    inputs.adapter = std::make_unique<FixtureAdapter>(
        parse_text_fixtures(read_file(cfg.paths.explanations)));
    explanations = explanation_source(s, *stack, inputs);
  }
  EvalConfig ecfg;
  ecfg.ks = cfg.ks;
  ecfg.pool_size = cfg.pool_size;
  ecfg.seed = cfg.seed;
  ecfg.config_digest = ctx.digest;

  MetricReport standard = evaluate_split(ranker, s.data.split, s.data.num_items(), ecfg, explanations);
  standard.ranker = cfg.ranker;
  ColdWarmReport cw =
      cold_warm_report(ranker, s.data.split, s.data.partition, s.data.num_items(), ecfg, explanations);
  if (cw.warm) cw.warm->ranker = cfg.ranker;
  if (cw.cold) cw.cold->ranker = cfg.ranker;

  std::string report = ctx.header("eval report");
  report += "semantic_path_items " + std::to_string(s.scorer->semantic_path_count()) + " of " +
            std::to_string(s.data.num_items()) + "\n";
  report += "[standard]\n" + serialize_report(standard);
  report += "[warm]\n" + cohort_section(cw, Protocol::kWarm);
  report += "[cold]\n" + cohort_section(cw, Protocol::kCold);
  report += "[gap]\n";
  for (int k : cfg.ks) {
    const auto g = cw.gap(k);
    report += "gap@" + std::to_string(k) + " " + (g ? format_double(*g) : std::string("-")) + "\n";
  }
  std::vector<MetricReport> rows{standard};
  if (cw.warm) rows.push_back(*cw.warm);
  if (cw.cold) rows.push_back(*cw.cold);

  if (!cfg.paths.zero_shot_interactions.empty()) {
    ZeroShotResult zs = zero_shot_eval(s.cf, s.net, cfg.paths.zero_shot_interactions,
                                       cfg.paths.zero_shot_catalog, cfg.paths.zero_shot_embeddings,
                                       cfg);
    zs.report.config_digest = ctx.digest;
    std::string zr = ctx.header("zero-shot report");
    zr += "target_items " + std::to_string(zs.target_items) + "\n";
    zr += "semantic_path_items " + std::to_string(zs.semantic_path_items) + "\n";
    zr += serialize_report(zs.report);
    ctx.commit(artifact::kZeroShotReport, zr);
    rows.push_back(zs.report);
  }
  report += "[table]\n" + format_summary_table(rows);
  ctx.commit(artifact::kEvalReport, report);
  ctx.result.summary = format_summary_table(rows);
}

// ---------------------------------------------------------------- sweep

void run_sweep(Context& ctx) {
  const RunConfig& cfg = ctx.cfg;
  std::vector<CotRecord> records = load_records(ctx);
  DownstreamEval downstream;
  std::optional<ProjectionSetup> setup;
  if (cfg.sweep_downstream) {
    setup.emplace(load_projection_setup(ctx));
    downstream = [&](const std::vector<CotRecord>& kept) -> DownstreamMetrics {
      bool any = false;
      for (const CotRecord& r : kept) any = any || r.instance.label == 1;
      if (!any) return {};
      ProjectionTrainResult res = train_projection_on(*setup, kept, cfg, nullptr);
      EvalConfig ecfg;
      ecfg.ks = {1};
      ecfg.pool_size = cfg.pool_size;
      ecfg.seed = cfg.seed;
      ExplanationInputs inputs;
      ExplanationSource explanations;
      if (!cfg.paths.explanations.empty() && !cfg.paths.references.empty()) {
        inputs.references = parse_text_fixtures(read_file(cfg.paths.references));
        inputs.adapter = std::make_unique<FixtureAdapter>(
            parse_text_fixtures(read_file(cfg.paths.explanations)));
        explanations = explanation_source(*setup, res.stack, inputs);
      }
      MetricReport r = evaluate_split(surrogate_ranker(*setup, res.stack), setup->data.split,
                                      setup->data.num_items(), ecfg, explanations);
      return {r.hr.at(1), r.rouge_l};
    };
  }
  // Records were scored at the configured threshold; re-threshold from scores.
  std::vector<SweepRow> rows = threshold_sweep(records, cfg.sweep_thresholds, downstream);
  ctx.commit(artifact::kSweep, ctx.header("threshold sweep") + serialize_sweep(rows));
  ctx.result.summary = serialize_sweep(rows);
}

// ---------------------------------------------------------------- report

void run_report(Context& ctx) {
  ctx.need(artifact::kPrepareReport, Stage::kPrepare);
  const std::pair<const char*, const char*> parts[] = {
      {"prepare", artifact::kPrepareReport}, {"train-cf", artifact::kCfReport},
      {"train-align", artifact::kAlignReport}, {"cot", artifact::kCotReport},
      {"train-proj", artifact::kProjReport}, {"eval", artifact::kEvalReport},
      {"zero-shot", artifact::kZeroShotReport}, {"sweep", artifact::kSweep},
  };
  std::string out = ctx.header("summary");
  for (const auto& [name, file] : parts) {
    out += "== " + std::string(name) + " ==\n";
    const fs::path p = ctx.at(file);
    if (!fs::exists(p)) {
      out += "(not run)\n";
      continue;
    }
    const std::string text = read_file(p);
    for (std::string_view line : data_lines(text)) out += std::string(line) + "\n";
  }
  ctx.commit(artifact::kSummary, out);
  ctx.result.summary = out;
}

}  // namespace

std::string to_string(Stage stage) {
  for (const auto& [s, name] : stage_names()) {
    if (s == stage) return name;
  }
  return "?";
}

Stage parse_stage(const std::string& name) {
  for (const auto& [s, n] : stage_names()) {
    if (name == n) return s;
  }
  throw ConfigError("unknown stage '" + name + "'");
}

const std::vector<Stage>& all_stages() {
  static const std::vector<Stage> stages = [] {
    std::vector<Stage> out;
    for (const auto& [s, name] : stage_names()) out.push_back(s);
    return out;
  }();
  return stages;
}

PreparedData load_prepared(const RunConfig& cfg) {
  const fs::path items_path = cfg.paths.out / artifact::kItems;
  const fs::path split_path = cfg.paths.out / artifact::kSplit;
  if (!fs::exists(items_path) || !fs::exists(split_path)) {
    throw DependencyError("prepared dataset missing in '" + cfg.paths.out.string() +
                          "'; run 'prepare' first");
  }
  PreparedData data;
  data.catalog = parse_catalog(read_file(cfg.paths.catalog));
  const std::string items_text = read_file(items_path);
  for (std::string_view line : data_lines(items_text)) {
    const auto f = split(line, '\t');
    if (f.size() != 4) throw DataError("malformed " + items_path.string());
    const int q = static_cast<int>(data.item_ids.size());
    data.item_ids.emplace_back(f[1]);
    data.partition.frequency.push_back(std::stoi(std::string(f[2])));
    if (f[3] == "warm") data.partition.warm.push_back(q);
    if (f[3] == "cold") data.partition.cold.push_back(q);
  }
  const auto index = index_by_name(data.item_ids);
  auto item = [&](std::string_view id) {
    auto it = index.find(std::string(id));
    if (it == index.end()) throw DataError("split references unknown item '" + std::string(id) + "'");
    return it->second;
  };
  const std::string split_text = read_file(split_path);
  for (std::string_view line : data_lines(split_text)) {
    const auto f = split(line, '\t');
    if (f.size() != 4) throw DataError("malformed " + split_path.string());
    UserSplit u;
    u.user = static_cast<int>(data.user_ids.size());
    data.user_ids.emplace_back(f[0]);
    for (std::string_view id : split(f[1], ' ')) u.train.push_back(item(id));
    u.validation = item(f[2]);
    u.test = item(f[3]);
    data.split.users.push_back(std::move(u));
  }
  for (const std::string& id : data.item_ids) {
    if (!data.catalog.count(id)) throw DataError("catalog has no entry for item '" + id + "'");
  }
  return data;
}

UnifiedScorer::UnifiedScorer(const CfModel& cf, const AlignmentNetwork& net,
                             const SemanticStore& semantics, std::vector<std::string> item_ids)
    : cf_(cf) {
  const auto n = static_cast<Eigen::Index>(item_ids.size());
  const int d = cf.config().embed_dim;
  if (net.collab_dim() != d) throw ContractError("alignment network and CF model widths differ");
  history_vectors_.resize(n, d);
  item_vectors_.resize(n, d);
  latents_.resize(n, net.latent_dim());
  for (Eigen::Index q = 0; q < n; ++q) {
    UnifiedEmbedding u = unified_item_embedding(net, item_ids[q], cf, semantics);
    sources_.push_back(u.source);
    latents_.row(q) = u.vector.transpose();
    const VectorXd decoded = decode(net, Modality::kCollaborative, u.vector);
    item_vectors_.row(q) = decoded.transpose();
    if (u.source == EmbeddingSource::kCollaborativePath) {
      history_vectors_.row(q) = cf.item_embedding(item_ids[q])->transpose();
    } else {
      history_vectors_.row(q) = decoded.transpose();
    }
  }
}

std::size_t UnifiedScorer::semantic_path_count() const {
  return static_cast<std::size_t>(
      std::count(sources_.begin(), sources_.end(), EmbeddingSource::kSemanticPath));
}

VectorXd UnifiedScorer::user_vector(std::span<const int> history) const {
  if (history.empty()) throw ContractError("user_vector: empty history");
  const std::size_t len = std::min<std::size_t>(history.size(), cf_.config().max_history);
  const auto recent = history.last(len);
  MatrixXd m(static_cast<Eigen::Index>(len), history_vectors_.cols());
  for (std::size_t i = 0; i < len; ++i) m.row(i) = history_vectors_.row(recent[i]);
  return cf_.user_representation_from_vectors(m);
}

std::vector<int> UnifiedScorer::rank(const EvalQuery& query, bool aligned) const {
  const VectorXd x = user_vector(query.history);
  const MatrixXd& table = aligned ? item_vectors_ : history_vectors_;
  std::vector<std::pair<double, int>> scored;
  for (int q : query.pool) scored.emplace_back(table.row(q).dot(x), q);
  std::stable_sort(scored.begin(), scored.end(), [](const auto& a, const auto& b) {
    if (a.first != b.first) return a.first > b.first;
    return a.second < b.second;
  });
  std::vector<int> out;
  for (const auto& [s, q] : scored) out.push_back(q);
  return out;
}

ZeroShotResult zero_shot_eval(const CfModel& cf, const AlignmentNetwork& net,
                              const fs::path& interactions, const fs::path& catalog,
                              const fs::path& embeddings, const RunConfig& config) {
  InteractionLog log = filter_dataset(load_interactions(interactions, catalog),
                                      config.min_user_events, config.min_item_popularity);
  SplitDataset split = leave_one_out_split(build_sequences(log), &log.users);
  SemanticStore store = load_embeddings(embeddings);
  if (auto missing = store.missing(log.items.names()); !missing.empty()) {
    throw DataError("target item '" + missing.front() + "' has no semantic embedding");
  }
  UnifiedScorer scorer(cf, net, store, log.items.names());
  ZeroShotResult out;
  out.target_items = static_cast<std::size_t>(log.items.size());
  out.semantic_path_items = scorer.semantic_path_count();
  EvalConfig ecfg;
  ecfg.ks = config.ks;
  ecfg.pool_size = config.pool_size;
  ecfg.seed = config.seed;
  out.report = evaluate_split([&](const EvalQuery& q) { return scorer.rank(q, true); }, split,
                              log.items.size(), ecfg, {}, {}, Protocol::kZeroShot);
  out.report.ranker = "aligned";
  return out;
}

StageResult run_stage(Stage stage, const RunConfig& config, const RunOptions& options) {
  config.validate();
  fs::create_directories(config.paths.out);
  OutputLock lock(config.paths.out / artifact::kLock);
  Context ctx{stage, config, options, config.digest(), {}};
  ctx.log("stage " + to_string(stage) + " config " + ctx.digest + " seed " +
          std::to_string(config.seed));
  switch (stage) {
    case Stage::kPrepare: run_prepare(ctx); break;
    case Stage::kTrainCf: run_train_cf(ctx); break;
    case Stage::kTrainAlign: run_train_align(ctx); break;
    case Stage::kCot: run_cot(ctx); break;
    case Stage::kTrainProj: run_train_proj(ctx); break;
    case Stage::kEval: run_eval(ctx); break;
    case Stage::kSweep: run_sweep(ctx); break;
    case Stage::kReport: run_report(ctx); break;
  }
  return std::move(ctx.result);
}

}  // namespace cotrec
