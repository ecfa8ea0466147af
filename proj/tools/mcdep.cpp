// mcdep: train a transition parser, sample parse trees, and compute
// Monte Carlo syntax marginals and their downstream uses.
//
// Exit status: 0 success, 1 usage error, 2 data error.

#include <CLI11.hpp>

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <memory>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "mcdep/mcdep.hpp"

namespace fs = std::filesystem;
using namespace mcdep;

namespace {

// Bad flag combinations detected after CLI11 parsing.
struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

class Input {
 public:
  explicit Input(const std::string& path) {
    if (path == "-") return;
    file_ = std::make_unique<std::ifstream>(path);
    if (!*file_) throw std::runtime_error("cannot open " + path);
  }
  std::istream& get() { return file_ ? *file_ : std::cin; }

 private:
  std::unique_ptr<std::ifstream> file_;
};

class Output {
 public:
  explicit Output(const std::string& path) {
    if (path.empty() || path == "-") return;
    file_ = std::make_unique<std::ofstream>(path, std::ios::binary);
    if (!*file_) throw std::runtime_error("cannot write " + path);
  }
  std::ostream& get() { return file_ ? *file_ : std::cout; }
  void close() {
    if (!file_) return std::cout.flush(), void();
    file_->close();
    if (!*file_) throw std::runtime_error("error writing output");
  }

 private:
  std::unique_ptr<std::ofstream> file_;
};

std::vector<AnnotatedSentence> read_treebank(const std::string& path) {
  Input in(path);
  return read_conllu(in.get());
}

std::vector<SampledSentence> read_samples(const std::string& path) {
  Input in(path);
  auto out = group_samples(read_conllu(in.get()));
  if (out.empty()) throw ValidationError("no sentences in " + path);
  return out;
}

ActionModel read_model(const std::string& path) {
  Input in(path);
  return load_model(in.get());
}

std::string fmt(double v) { return format_double(v); }

std::string fmt(const std::optional<double>& v) { return v ? format_double(*v) : "NA"; }

// ---------------------------------------------------------------------------

struct TrainArgs {
  std::string train, dev, model;
  TrainConfig config;
};

int cmd_train(const TrainArgs& a) {
  const auto treebank = read_treebank(a.train);
  if (treebank.empty()) throw ValidationError("training treebank " + a.train + " is empty");
  std::vector<AnnotatedSentence> dev;
  if (!a.dev.empty()) dev = read_treebank(a.dev);
  const auto result = train(treebank, a.config, dev);
  std::cout << "sentences_used\t" << result.sentences_used << '\n'
            << "skipped_nonprojective\t" << result.skipped_nonprojective << '\n'
            << "skipped_underivable\t" << result.skipped_underivable << '\n'
            << "instances\t" << result.instances << '\n'
            << "features\t" << result.model.num_features() << '\n';
  for (const auto& e : result.log) {
    std::cout << "epoch\t" << e.epoch << "\ttrain_nll\t" << fmt(e.train_nll)
              << "\theldout_accuracy\t"
              << (std::isnan(e.heldout_accuracy) ? "NA" : fmt(e.heldout_accuracy)) << '\n';
  }
  Output out(a.model);
  save_model(result.model, out.get());
  out.close();
  return 0;
}

// ---------------------------------------------------------------------------

struct DecodeArgs {
  std::string model, input, output, mode = "greedy";
  int samples = 0;
  std::optional<std::uint64_t> seed;
  int workers = 1;
};

// Runs fn(i) -> text for every sentence on `workers` threads, then writes
// the pieces in input order.
template <class Fn>
void ordered_output(std::size_t count, int workers, std::ostream& out, Fn&& fn) {
  std::vector<std::string> chunks(count);
  parallel_for(count, workers, [&](std::size_t i) { chunks[i] = fn(i); });
  for (const auto& c : chunks) out << c;
}

int cmd_parse(const DecodeArgs& a) {
  if (a.mode != "greedy" && (a.samples < 1 || !a.seed))
    throw UsageError("--mode " + a.mode + " needs --samples and --seed");
  const auto model = read_model(a.model);
  const auto items = read_treebank(a.input);
  Output out(a.output);
  ordered_output(items.size(), a.workers, out.get(), [&](std::size_t i) {
    const Sentence& s = items[i].sentence;
    std::ostringstream block;
    if (a.mode == "greedy") {
      auto t = greedy_parse(model, s);
      write_conllu_block(block, s, &t);
      return block.str();
    }
    auto samples = draw_samples(model, s, a.samples, *a.seed);
    if (a.mode == "mcmap") {
      auto t = mc_map(samples);
      write_conllu_block(block, s, &t);
    } else {
      auto r = mbr_parse(samples);
      Sentence marked = s;
      if (!r.is_tree) marked.set_metadata("is_tree", "false");
      write_conllu_block(block, marked, r.assignment);
    }
    return block.str();
  });
  out.close();
  return 0;
}

int cmd_sample(const DecodeArgs& a) {
  const auto model = read_model(a.model);
  const auto items = read_treebank(a.input);
  Output out(a.output);
  ordered_output(items.size(), a.workers, out.get(), [&](std::size_t i) {
    const Sentence& s = items[i].sentence;
    std::ostringstream block;
    write_samples(block, s, sample_parses(model, s, a.samples, *a.seed));
    return block.str();
  });
  out.close();
  return 0;
}

// ---------------------------------------------------------------------------

struct AnalyzeArgs {
  std::string samples, gold, greedy, out_dir = ".";
  int d_min = 1, d_max = 3, calibration_d = 1;
  std::vector<double> thresholds = {0.01, 0.05, 0.1, 0.2, 0.3, 0.4, 0.5,
                                    0.6,  0.7,  0.8, 0.9, 0.95, 1.0};
  long bin_size = 5000;
  bool marginals = false;
};

std::map<std::string, ParseTree> trees_by_id(const std::vector<AnnotatedSentence>& items,
                                             const std::string& what) {
  std::map<std::string, ParseTree> out;
  for (const auto& item : items) {
    if (!item.tree) throw ValidationError(what + " sentence '" + item.sentence.sent_id + "' has no tree");
    out.emplace(item.sentence.sent_id, *item.tree);
  }
  return out;
}

const ParseTree& lookup(const std::map<std::string, ParseTree>& m, const std::string& id,
                        const std::string& what) {
  auto it = m.find(id);
  if (it == m.end()) throw ValidationError("no " + what + " tree for sentence '" + id + "'");
  return it->second;
}

int cmd_analyze(const AnalyzeArgs& a) {
  if (a.d_min < 1 || a.d_max < a.d_min) throw UsageError("need 1 <= --d-min <= --d-max");
  const auto sampled = read_samples(a.samples);
  fs::create_directories(a.out_dir);

  std::vector<SampleSet> sets;
  for (const auto& s : sampled) sets.push_back(s.samples);
  const auto report = entropy_report(sets);
  {
    Output out((fs::path(a.out_dir) / "entropy.tsv").string());
    out.get() << "sent_id\tn_tokens\tsamples\tdomain_size\ttop_counts\ttop_prob\tentropy\n";
    for (const auto& s : sets) {
      const auto sum = sample_summary(s, 3);
      std::string top;
      for (long c : sum.top_counts) top += (top.empty() ? "" : ",") + std::to_string(c);
      out.get() << s.sent_id() << '\t' << s.n_tokens() << '\t' << s.num_samples() << '\t'
                << sum.domain_size << '\t' << top << '\t' << fmt(sum.top_prob) << '\t'
                << fmt(sum.entropy) << '\n';
    }
    out.close();
  }
  std::cout << "sentences\t" << sets.size() << '\n'
            << "entropy_pearson\t" << fmt(report.pearson) << '\n'
            << "entropy_spearman\t" << fmt(report.spearman) << '\n';

  std::map<int, std::vector<std::map<DepPath, double>>> marginals;
  for (int d = std::min(a.d_min, a.calibration_d); d <= std::max(a.d_max, a.calibration_d); ++d)
    for (const auto& s : sets) marginals[d].push_back(path_marginals(s, d));

  if (a.marginals) {
    Output out((fs::path(a.out_dir) / "marginals.tsv").string());
    out.get() << "sent_id\ttype\tkey\tprobability\n";
    for (int d = a.d_min; d <= a.d_max; ++d)
      for (std::size_t i = 0; i < sets.size(); ++i)
        for (const auto& [p, prob] : marginals[d][i])
          out.get() << sets[i].sent_id() << "\tpath" << d << '\t' << p.key() << '\t' << fmt(prob)
                    << '\n';
    out.close();
  }

  if (a.gold.empty()) return 0;
  const auto gold_by_id = trees_by_id(read_treebank(a.gold), "gold");
  std::vector<ParseTree> gold;
  LasCounts las_mcmap, las_mbr;
  long non_tree = 0;
  for (const auto& s : sampled) {
    gold.push_back(lookup(gold_by_id, s.sentence.sent_id, "gold"));
    if (gold.back().size() != s.sentence.size())
      throw ValidationError("gold and samples disagree on length of '" + s.sentence.sent_id + "'");
    las_mcmap += las_counts(mc_map(s.samples).assignment(), gold.back());
    auto mbr = mbr_parse(s.samples);
    non_tree += !mbr.is_tree;
    las_mbr += las_counts(mbr.assignment, gold.back());
  }
  std::cout << "las_mcmap\t" << fmt(las_mcmap.score()) << '\n'
            << "las_mbr\t" << fmt(las_mbr.score()) << '\n'
            << "mbr_non_tree\t" << non_tree << '\n';

  std::vector<ParseTree> greedy;
  if (!a.greedy.empty()) {
    const auto greedy_by_id = trees_by_id(read_treebank(a.greedy), "greedy");
    for (const auto& s : sampled) greedy.push_back(lookup(greedy_by_id, s.sentence.sent_id, "greedy"));
    LasCounts c;
    for (std::size_t i = 0; i < gold.size(); ++i) c += las_counts(greedy[i].assignment(), gold[i]);
    std::cout << "las_greedy\t" << fmt(c.score()) << '\n';
  }

  {
    Output out((fs::path(a.out_dir) / "pr.tsv").string());
    out.get() << "d\tcurve\tthreshold\tmetric\tvalue\n";
    auto emit = [&](int d, const char* curve, const PRPoint& p) {
      for (auto [name, v] : {std::pair<const char*, double>{"precision", p.precision},
                             {"recall", p.recall},
                             {"f1", p.f1},
                             {"predicted", static_cast<double>(p.predicted)},
                             {"gold", static_cast<double>(p.gold)}})
        out.get() << d << '\t' << curve << '\t' << fmt(p.threshold) << '\t' << name << '\t'
                  << fmt(v) << '\n';
    };
    for (int d = a.d_min; d <= a.d_max; ++d) {
      const auto curve = path_pr_curve(marginals[d], gold, d, a.thresholds);
      for (const auto& p : curve.points) emit(d, "marginal", p);
      emit(d, "marginal_max_f1", curve.best);
      std::cout << "pr\td=" << d << "\tmax_f1\t" << fmt(curve.best.f1) << "\tthreshold\t"
                << fmt(curve.best.threshold) << '\n';
      if (!greedy.empty()) {
        const auto g = greedy_path_pr(greedy, gold, d);
        emit(d, "greedy", g);
        std::cout << "pr\td=" << d << "\tgreedy_f1\t" << fmt(g.f1) << "\tprecision\t"
                  << fmt(g.precision) << '\n';
      }
    }
    out.close();
  }

  const auto items = calibration_items(marginals[a.calibration_d], gold, a.calibration_d);
  if (items.empty()) {
    std::cerr << "warning: no predictions to calibrate\n";
    return 0;
  }
  const auto table = calibration_table(items, a.bin_size);
  if (table.single_bin_warning)
    std::cerr << "warning: " << items.size() << " predictions is fewer than bin size "
              << a.bin_size << "; reporting a single bin\n";
  Output out((fs::path(a.out_dir) / "calibration.tsv").string());
  out.get() << "d\tbin\tcount\tlo\thi\tmean_predicted\tempirical\n";
  std::vector<double> conf, emp;
  for (std::size_t i = 0; i < table.bins.size(); ++i) {
    const auto& b = table.bins[i];
    out.get() << a.calibration_d << '\t' << i << '\t' << b.count << '\t' << fmt(b.lo) << '\t'
              << fmt(b.hi) << '\t' << fmt(b.mean_predicted) << '\t' << fmt(b.empirical) << '\n';
    conf.push_back(b.mean_predicted);
    emp.push_back(b.empirical);
  }
  out.close();
  std::cout << "calibration\tbins\t" << table.bins.size() << "\tmean_abs_gap\t"
            << fmt(table.mean_abs_gap) << "\tspearman\t" << fmt(spearman(conf, emp)) << '\n';
  return 0;
}

// ---------------------------------------------------------------------------

struct ExtractArgs {
  std::string samples, rules, rule_name, mentions, output;
};

int cmd_extract(const ExtractArgs& a) {
  const auto qf = load_query_file(a.rules);
  if (qf.rules.empty()) throw ValidationError("no rules in " + a.rules);
  if (a.rule_name.empty() && qf.rules.size() > 1)
    throw UsageError(a.rules + " defines several rules; pick one with --rule-name");
  const Rule& rule = a.rule_name.empty() ? qf.rules.front() : qf.rule(a.rule_name);
  const auto sampled = read_samples(a.samples);
  std::map<std::string, const SampledSentence*> by_id;
  for (const auto& s : sampled) by_id[s.sentence.sent_id] = &s;
  Input min(a.mentions);
  const auto mentions = read_mentions(min.get());
  const auto ranked = rank_entities(mentions, rule, by_id);
  Output out(a.output);
  out.get() << "entity_id\tprobability\tsentences\tsentence_probabilities\n";
  for (const auto& e : ranked) {
    std::string detail;
    for (const auto& [sid, p] : e.sentences)
      detail += (detail.empty() ? "" : ";") + sid + "=" + fmt(p);
    out.get() << e.entity_id << '\t' << fmt(e.probability) << '\t' << e.sentences.size() << '\t'
              << detail << '\n';
  }
  out.close();
  return 0;
}

// ---------------------------------------------------------------------------

struct EvalArgs {
  std::string gold, pred;
  int d_max = 3;
};

int cmd_eval(const EvalArgs& a) {
  const auto gold_by_id = trees_by_id(read_treebank(a.gold), "gold");
  Input in(a.pred);
  const auto pred = read_conllu_assignments(in.get());
  if (pred.empty()) throw ValidationError("no sentences in " + a.pred);
  LasCounts las;
  std::vector<ParseTree> p_trees, g_trees;
  long non_tree = 0;
  for (const auto& p : pred) {
    if (!p.assignment) throw ValidationError("prediction '" + p.sentence.sent_id + "' has no heads");
    const auto& g = lookup(gold_by_id, p.sentence.sent_id, "gold");
    las += las_counts(*p.assignment, g);
    if (is_tree(*p.assignment)) {
      p_trees.emplace_back(*p.assignment);
      g_trees.push_back(g);
    } else {
      ++non_tree;
    }
  }
  std::cout << "sentences\t" << pred.size() << '\n'
            << "tokens\t" << las.total << '\n'
            << "las\t" << fmt(las.score()) << '\n'
            << "non_tree\t" << non_tree << '\n';
  if (non_tree > 0)
    std::cerr << "warning: path scores skip " << non_tree << " non-tree predictions\n";
  for (int d = 1; d <= a.d_max; ++d) {
    const auto p = greedy_path_pr(p_trees, g_trees, d);
    std::cout << "path\td=" << d << "\tprecision\t" << fmt(p.precision) << "\trecall\t"
              << fmt(p.recall) << "\tf1\t" << fmt(p.f1) << '\n';
  }
  return 0;
}

// ---------------------------------------------------------------------------

struct RolesArgs {
  std::string train_parses, train_roles, test_parses, test_roles, output;
};

std::map<std::string, ParsedSentence> index_parses(const std::vector<SampledSentence>& s) {
  std::map<std::string, ParsedSentence> out;
  for (const auto& x : s) out[x.sentence.sent_id] = {&x.sentence, &x.samples};
  return out;
}

std::vector<RoleInstance> read_roles(const std::string& path) {
  Input in(path);
  return read_role_instances(in.get());
}

int cmd_roles(const RolesArgs& a) {
  const auto train_s = read_samples(a.train_parses);
  const auto test_s = read_samples(a.test_parses);
  const auto train_idx = index_parses(train_s);
  const auto test_idx = index_parses(test_s);
  const auto model = train_semantic(read_roles(a.train_roles), train_idx);
  const auto test = read_roles(a.test_roles);
  Output out(a.output);
  out.get() << "sent_id\tpredicate\targument\tgold\tpredicted\tposterior\tbaseline\n";
  long correct = 0, baseline = 0;
  for (const auto& r : test) {
    auto it = test_idx.find(r.sent_id);
    if (it == test_idx.end()) throw ValidationError("no parses for sentence '" + r.sent_id + "'");
    const auto& s = *it->second.sentence;
    const auto got = assign_role(model, r, s, *it->second.samples);
    const auto base = model.most_common(predicate_key(r, s));
    correct += got.label == r.label;
    baseline += base == r.label;
    out.get() << r.sent_id << '\t' << r.predicate << '\t' << r.arg_start << '-' << r.arg_end
              << '\t' << r.label << '\t' << got.label << '\t' << fmt(got.posterior.at(got.label))
              << '\t' << base << '\n';
  }
  out.close();
  const double n = test.empty() ? 1.0 : static_cast<double>(test.size());
  std::cerr << "instances\t" << test.size() << '\n'
            << "accuracy\t" << fmt(correct / n) << '\n'
            << "baseline_accuracy\t" << fmt(baseline / n) << '\n';
  return 0;
}

// ---------------------------------------------------------------------------

struct SynthArgs {
  std::string prefix = "syn", output, roles;
  int count = 100;
  std::uint64_t seed = 1;
};

int cmd_synth(const SynthArgs& a) {
  const auto tb = synthetic_treebank(a.prefix, a.count, a.seed);
  Output out(a.output);
  write_conllu(out.get(), tb);
  out.close();
  if (!a.roles.empty()) {
    Output r(a.roles);
    for (const auto& x : synthetic_roles(tb))
      r.get() << x.sent_id << '\t' << x.predicate << '\t' << x.arg_start << '-' << x.arg_end << '\t'
              << x.label << '\t' << x.predicate_key << '\n';
    r.close();
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Transition-parser sampling and Monte Carlo syntax marginals"};
  app.require_subcommand(1);
  app.set_help_all_flag("--help-all", "Help for every subcommand");

  TrainArgs tr;
  auto* train_cmd = app.add_subcommand("train", "Train a model on a CoNLL-U treebank");
  train_cmd->add_option("--train", tr.train, "Training treebank (CoNLL-U)")->required();
  train_cmd->add_option("--dev", tr.dev, "Held-out treebank for the per-epoch accuracy log");
  train_cmd->add_option("--model", tr.model, "Output model file")->required();
  train_cmd->add_option("--epochs", tr.config.epochs)->capture_default_str()->check(CLI::NonNegativeNumber);
  train_cmd->add_option("--learning-rate", tr.config.learning_rate)->capture_default_str()->check(CLI::PositiveNumber);
  train_cmd->add_option("--l2", tr.config.l2)->capture_default_str()->check(CLI::NonNegativeNumber);
  train_cmd->add_option("--seed", tr.config.seed, "Shuffling seed")->capture_default_str();
  train_cmd->add_option("--heldout-fraction", tr.config.heldout_fraction)->capture_default_str()->check(CLI::Range(0.0, 0.5));
  train_cmd->add_option("--min-feature-count", tr.config.min_feature_count)->capture_default_str()->check(CLI::PositiveNumber);

  DecodeArgs pa;
  auto* parse_cmd = app.add_subcommand("parse", "Parse sentences: greedy, MC-MAP or MBR");
  parse_cmd->add_option("--model", pa.model)->required();
  parse_cmd->add_option("--input", pa.input, "CoNLL-U input ('-' for stdin)")->required();
  parse_cmd->add_option("-o,--output", pa.output, "Output file (default stdout)");
  parse_cmd->add_option("--mode", pa.mode)->capture_default_str()->check(CLI::IsMember({"greedy", "mcmap", "mbr"}));
  parse_cmd->add_option("--samples", pa.samples, "Samples per sentence (mcmap, mbr)")->check(CLI::PositiveNumber);
  parse_cmd->add_option("--seed", pa.seed, "Sampling seed (mcmap, mbr)");
  parse_cmd->add_option("--workers", pa.workers)->capture_default_str()->check(CLI::PositiveNumber);

  DecodeArgs sa;
  auto* sample_cmd = app.add_subcommand("sample", "Draw S parse trees per sentence");
  sample_cmd->add_option("--model", sa.model)->required();
  sample_cmd->add_option("--input", sa.input, "CoNLL-U input ('-' for stdin)")->required();
  sample_cmd->add_option("-o,--output", sa.output, "Output file (default stdout)");
  sample_cmd->add_option("--samples", sa.samples, "Samples per sentence")->required()->check(CLI::PositiveNumber);
  sample_cmd->add_option("--seed", sa.seed)->required();
  sample_cmd->add_option("--workers", sa.workers)->capture_default_str()->check(CLI::PositiveNumber);

  AnalyzeArgs an;
  auto* analyze_cmd = app.add_subcommand("analyze", "Entropy, path PR curves and calibration from samples");
  analyze_cmd->add_option("--samples", an.samples, "Multi-sample CoNLL-U")->required();
  analyze_cmd->add_option("--gold", an.gold, "Gold treebank for PR and calibration");
  analyze_cmd->add_option("--greedy", an.greedy, "Greedy parses to compare against");
  analyze_cmd->add_option("--out-dir", an.out_dir)->capture_default_str();
  analyze_cmd->add_option("--d-min", an.d_min)->capture_default_str();
  analyze_cmd->add_option("--d-max", an.d_max)->capture_default_str();
  analyze_cmd->add_option("--thresholds", an.thresholds)->delimiter(',')->check(CLI::Range(1e-12, 1.0));
  analyze_cmd->add_option("--bin-size", an.bin_size)->capture_default_str()->check(CLI::PositiveNumber);
  analyze_cmd->add_option("--calibration-d", an.calibration_d)->capture_default_str()->check(CLI::PositiveNumber);
  analyze_cmd->add_flag("--marginals", an.marginals, "Also write marginals.tsv");

  ExtractArgs ex;
  auto* extract_cmd = app.add_subcommand("extract", "Rank entities by noisy-or rule probability");
  extract_cmd->add_option("--samples", ex.samples, "Multi-sample CoNLL-U")->required();
  extract_cmd->add_option("--rules", ex.rules, "Query file")->required();
  extract_cmd->add_option("--rule-name", ex.rule_name);
  extract_cmd->add_option("--mentions", ex.mentions, "TSV: entity_id sent_id start end")->required();
  extract_cmd->add_option("-o,--output", ex.output);

  EvalArgs ev;
  auto* eval_cmd = app.add_subcommand("eval", "LAS and path precision/recall of single parses");
  eval_cmd->add_option("--gold", ev.gold)->required();
  eval_cmd->add_option("--pred", ev.pred)->required();
  eval_cmd->add_option("--d-max", ev.d_max)->capture_default_str()->check(CLI::PositiveNumber);

  RolesArgs ro;
  auto* roles_cmd = app.add_subcommand("roles", "Train and apply the count-based role model");
  roles_cmd->add_option("--train-parses", ro.train_parses)->required();
  roles_cmd->add_option("--train-roles", ro.train_roles)->required();
  roles_cmd->add_option("--test-parses", ro.test_parses)->required();
  roles_cmd->add_option("--test-roles", ro.test_roles)->required();
  roles_cmd->add_option("-o,--output", ro.output);

  SynthArgs sy;
  auto* synth_cmd = app.add_subcommand("synth", "Write a synthetic treebank");
  synth_cmd->add_option("--count", sy.count)->capture_default_str()->check(CLI::PositiveNumber);
  synth_cmd->add_option("--seed", sy.seed)->capture_default_str();
  synth_cmd->add_option("--prefix", sy.prefix)->capture_default_str();
  synth_cmd->add_option("-o,--output", sy.output);
  synth_cmd->add_option("--roles", sy.roles, "Also write role instances (TSV)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 1;
  }

  try {
    if (*train_cmd) return cmd_train(tr);
    if (*parse_cmd) return cmd_parse(pa);
    if (*sample_cmd) return cmd_sample(sa);
    if (*analyze_cmd) return cmd_analyze(an);
    if (*extract_cmd) return cmd_extract(ex);
    if (*eval_cmd) return cmd_eval(ev);
    if (*roles_cmd) return cmd_roles(ro);
    if (*synth_cmd) return cmd_synth(sy);
  } catch (const UsageError& e) {
    std::cerr << "mcdep: " << e.what() << '\n';
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "mcdep: " << e.what() << '\n';
    return 2;
  }
  return 1;
}
