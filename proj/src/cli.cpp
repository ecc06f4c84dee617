#include "fineco/cli.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <functional>
#include <iostream>
#include <map>
#include <optional>
#include <sstream>
#include <utility>

#include <CLI11.hpp>

#include "fineco/data.hpp"
#include "fineco/errors.hpp"
#include "fineco/trainkit.hpp"

namespace fineco {
namespace {

std::string format_double(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

void write_text_file(const std::string& path, const std::string& content) {
  std::ofstream file(path, std::ios::trunc | std::ios::binary);
  if (!file) throw IoError(path + ": cannot open for writing");
  file.write(content.data(), static_cast<std::streamsize>(content.size()));
  if (!file) throw IoError(path + ": write failed");
}

// The provenance echo written next to every command's outputs: sorted
// key=value lines, no timestamps, so identical invocations produce
// identical bytes.
void write_echo(const std::string& path, const std::string& command,
                std::map<std::string, std::string> kv) {
  kv["command"] = command;
  std::string out;
  for (const auto& [k, v] : kv) out += k + "=" + v + "\n";
  write_text_file(path, out);
}

std::vector<std::string> split_list(const std::string& text) {
  std::vector<std::string> out;
  std::string item;
  std::istringstream in(text);
  while (std::getline(in, item, ',')) out.push_back(item);
  return out;
}

std::string strategy_kind_name(SamplingStrategy::Kind kind) {
  switch (kind) {
    case SamplingStrategy::Kind::fixed_k: return "fixed_k";
    case SamplingStrategy::Kind::median: return "median";
    case SamplingStrategy::Kind::ratio: return "ratio";
    case SamplingStrategy::Kind::random: return "random";
  }
  throw std::invalid_argument("strategy_kind_name: unknown kind");
}

std::string metrics_csv(const EvalReport& report) {
  std::string out = "r1,r5,r10,medr,accuracy,selector_precision,selector_recall\n";
  out += format_double(report.metrics.r1) + "," + format_double(report.metrics.r5) + "," +
         format_double(report.metrics.r10) + "," + format_double(report.metrics.medr) + "," +
         format_double(report.metrics.accuracy) + "," +
         format_double(report.selector_precision) + "," + format_double(report.selector_recall) +
         "\n";
  return out;
}

// ---------------------------------------------------------------------------
// Shared training-config plumbing: subcommands expose every TrainConfig key
// as a flag; values given on the command line override the --config file.

struct TrainOptions {
  TrainConfig slots;
  std::string strategy_text;
  std::string task_text;
  std::string config_path;
  std::vector<std::pair<CLI::Option*, std::function<void(TrainConfig&)>>> overrides;

  void attach(CLI::App& cmd) {
    auto over = [this](CLI::Option* opt, std::function<void(TrainConfig&)> apply) {
      overrides.emplace_back(opt, std::move(apply));
    };
    cmd.add_option("--config", config_path, "key=value config file; flags below override it");
    over(cmd.add_option("--lr", slots.lr, "peak learning rate"),
         [this](TrainConfig& c) { c.lr = slots.lr; });
    over(cmd.add_option("--warmup-steps", slots.warmup_steps, "linear warmup length"),
         [this](TrainConfig& c) { c.warmup_steps = slots.warmup_steps; });
    over(cmd.add_option("--total-steps", slots.total_steps, "optimizer steps to run"),
         [this](TrainConfig& c) { c.total_steps = slots.total_steps; });
    over(cmd.add_option("--batch-size", slots.batch_size, "pairs per step"),
         [this](TrainConfig& c) { c.batch_size = slots.batch_size; });
    over(cmd.add_option("--seed", slots.seed, "run seed"),
         [this](TrainConfig& c) { c.seed = slots.seed; });
    over(cmd.add_option("--strategy", strategy_text,
                        "positive assignment: fixed_k:K | median | ratio:RHO | random:K[:SEED]"),
         [this](TrainConfig& c) { c.strategy = SamplingStrategy::parse(strategy_text); });
    over(cmd.add_option("--l1-weight", slots.l1_weight,
                        "weight of the frame-level loss term (0 disables it)"),
         [this](TrainConfig& c) { c.l1_weight = slots.l1_weight; });
    over(cmd.add_option("--l1-start-step", slots.l1_start_step,
                        "step after which the frame-level term joins the objective"),
         [this](TrainConfig& c) { c.l1_start_step = slots.l1_start_step; });
    over(cmd.add_option("--tau", slots.tau, "contrastive temperature"),
         [this](TrainConfig& c) { c.tau = slots.tau; });
    over(cmd.add_option("--adam-beta2", slots.adam_beta2, "Adam second-moment decay"),
         [this](TrainConfig& c) { c.adam_beta2 = slots.adam_beta2; });
    over(cmd.add_option("--tau-ds", slots.tau_ds, "dual softmax temperature"),
         [this](TrainConfig& c) { c.tau_ds = slots.tau_ds; });
    over(cmd.add_option("--task", task_text, "retrieval | qa"),
         [this](TrainConfig& c) { c.task = parse_task(task_text); });
    over(cmd.add_flag("--l1-detach-encoder,!--no-l1-detach-encoder", slots.l1_detach_encoder,
                      "stop frame-level gradients at the encoder boundary"),
         [this](TrainConfig& c) { c.l1_detach_encoder = slots.l1_detach_encoder; });
    over(cmd.add_option("--embed-dim", slots.embed_dim, "encoder width"),
         [this](TrainConfig& c) { c.embed_dim = slots.embed_dim; });
    over(cmd.add_option("--proj-dim", slots.proj_dim, "joint space width"),
         [this](TrainConfig& c) { c.proj_dim = slots.proj_dim; });
    over(cmd.add_option("--fs-hidden", slots.fs_hidden, "selector hidden width"),
         [this](TrainConfig& c) { c.fs_hidden = slots.fs_hidden; });
    over(cmd.add_option("--max-video-len", slots.max_video_len, "frame cap per video"),
         [this](TrainConfig& c) { c.max_video_len = slots.max_video_len; });
    over(cmd.add_option("--max-text-len", slots.max_text_len, "token cap per text"),
         [this](TrainConfig& c) { c.max_text_len = slots.max_text_len; });
    over(cmd.add_flag("--video-attention,!--no-video-attention", slots.video_attention,
                      "contextualize frames with a self-attention block"),
         [this](TrainConfig& c) { c.video_attention = slots.video_attention; });
    over(cmd.add_flag("--text-attention,!--no-text-attention", slots.text_attention,
                      "contextualize tokens with a self-attention block"),
         [this](TrainConfig& c) { c.text_attention = slots.text_attention; });
    over(cmd.add_flag("--select-by-val-loss,!--no-select-by-val-loss", slots.select_by_val_loss,
                      "keep the checkpoint with the best validation loss"),
         [this](TrainConfig& c) { c.select_by_val_loss = slots.select_by_val_loss; });
    over(cmd.add_option("--val-interval", slots.val_interval, "steps between validation passes"),
         [this](TrainConfig& c) { c.val_interval = slots.val_interval; });
  }

  TrainConfig resolve() const {
    TrainConfig cfg = config_path.empty() ? TrainConfig{} : load_train_config(config_path);
    for (const auto& [opt, apply] : overrides)
      if (opt->count() > 0) apply(cfg);
    return cfg;
  }
};

// ---------------------------------------------------------------------------
// gen-data

struct GenDataArgs {
  std::string out;
  SyntheticSpec spec;
  int split = 0;  // 0 = single file pair; otherwise first N pairs go to .train
};

int cmd_gen_data(const GenDataArgs& a) {
  a.spec.validate();
  if (a.split < 0 || a.split > a.spec.num_pairs)
    throw UsageError("gen-data: --split must lie in [0, --pairs]");
  const Dataset data = generate_synthetic(a.spec);
  if (a.split == 0) {
    save_dataset(data, a.out);
  } else {
    save_dataset(Dataset(data.begin(), data.begin() + a.split), a.out + ".train");
    save_dataset(Dataset(data.begin() + a.split, data.end()), a.out + ".test");
  }
  write_echo(a.out + ".config.txt", "gen-data",
             {{"out", a.out},
              {"pairs", std::to_string(a.spec.num_pairs)},
              {"topics", std::to_string(a.spec.num_topics)},
              {"frames", std::to_string(a.spec.frames_per_video)},
              {"dim", std::to_string(a.spec.feature_dim)},
              {"tokens", std::to_string(a.spec.tokens_per_text)},
              {"vocab", std::to_string(a.spec.vocab_size)},
              {"relevant_fraction", format_double(a.spec.relevant_fraction)},
              {"noise_std", format_double(a.spec.noise_std)},
              {"seed", std::to_string(a.spec.seed)},
              {"split", std::to_string(a.split)}});
  return 0;
}

// ---------------------------------------------------------------------------
// train

struct TrainArgs {
  std::string data, out, val, resume;
  std::int64_t stop_after_step = 0;  // 0 = run to total_steps
  TrainOptions options;
};

int cmd_train(const TrainArgs& a) {
  const TrainConfig cfg = a.options.resolve();
  cfg.validate();
  const Dataset data = load_dataset(a.data);
  std::optional<Dataset> val;
  if (!a.val.empty()) val = load_dataset(a.val);
  std::optional<Checkpoint> resume;
  if (!a.resume.empty()) resume = load_checkpoint(a.resume);

  const TrainResult result =
      train(cfg, data, val ? &*val : nullptr, resume ? &*resume : nullptr, a.stop_after_step);
  save_checkpoint(result.checkpoint, a.out + ".ckpt");
  write_text_file(a.out + ".loss.csv", loss_log_csv(result.log));
  // The echo doubles as a loadable --config file; provenance rides in
  // comments so the key=value body stays canonical.
  std::string echo = "# fineco train\n# data=" + a.data + "\n";
  if (!a.val.empty()) echo += "# val=" + a.val + "\n";
  if (!a.resume.empty()) echo += "# resume=" + a.resume + "\n";
  echo += serialize_train_config(cfg);
  write_text_file(a.out + ".config.txt", echo);
  return 0;
}

// ---------------------------------------------------------------------------
// eval

struct EvalArgs {
  std::string ckpt, data, out, task_text;
  bool dual_softmax = false;
};

int cmd_eval(const EvalArgs& a) {
  const Checkpoint ckpt = load_checkpoint(a.ckpt);
  const Dataset data = load_dataset(a.data);
  const Task task = a.task_text.empty() ? ckpt.config.task : parse_task(a.task_text);
  const EvalReport report = evaluate(ckpt, data, task, a.dual_softmax);
  const std::string csv = metrics_csv(report);
  write_text_file(a.out + ".metrics.csv", csv);
  write_echo(a.out + ".config.txt", "eval",
             {{"ckpt", a.ckpt},
              {"data", a.data},
              {"task", task_name(task)},
              {"dual_softmax", a.dual_softmax ? "true" : "false"},
              {"out", a.out}});
  std::cout << csv;
  return 0;
}

// ---------------------------------------------------------------------------
// sweep

struct SweepArgs {
  std::string data, test, out, grid_text, seeds_text;
  TrainOptions options;
};

int cmd_sweep(const SweepArgs& a) {
  std::vector<SamplingStrategy> grid;
  for (const std::string& cell : split_list(a.grid_text)) grid.push_back(SamplingStrategy::parse(cell));
  if (grid.empty()) throw UsageError("sweep: --grid lists no strategies");
  std::vector<std::uint64_t> seeds;
  for (const std::string& s : split_list(a.seeds_text)) {
    try {
      std::size_t used = 0;
      seeds.push_back(std::stoull(s, &used));
      if (used != s.size()) throw std::invalid_argument(s);
    } catch (const std::exception&) {
      throw UsageError("sweep: bad seed '" + s + "' in --seeds");
    }
  }
  if (seeds.empty()) throw UsageError("sweep: --seeds lists no seeds");

  const TrainConfig base = a.options.resolve();
  const Dataset train_data = load_dataset(a.data);
  const Dataset test_data = load_dataset(a.test);

  std::string csv =
      "strategy,k_or_rho,seed,r1,r5,r10,medr,selector_precision,selector_recall\n";
  for (const SamplingStrategy& strategy : grid) {
    for (std::uint64_t seed : seeds) {
      TrainConfig cell = base;
      cell.strategy = strategy;
      cell.seed = seed;
      cell.validate();
      const TrainResult result = train(cell, train_data);
      const EvalReport report =
          evaluate(result.checkpoint, test_data, cell.task, /*use_dual_softmax=*/false);
      csv += strategy_kind_name(strategy.kind) + "," + strategy.k_or_rho() + "," +
             std::to_string(seed) + "," + format_double(report.metrics.r1) + "," +
             format_double(report.metrics.r5) + "," + format_double(report.metrics.r10) + "," +
             format_double(report.metrics.medr) + "," +
             format_double(report.selector_precision) + "," +
             format_double(report.selector_recall) + "\n";
      std::cout << "sweep: " << strategy.to_string() << " seed " << seed
                << " r1=" << report.metrics.r1 << "\n";
    }
  }
  write_text_file(a.out + ".sweep.csv", csv);
  write_echo(a.out + ".config.txt", "sweep",
             {{"data", a.data},
              {"test", a.test},
              {"out", a.out},
              {"grid", a.grid_text},
              {"seeds", a.seeds_text},
              {"config", serialize_train_config(base)}});
  return 0;
}

// ---------------------------------------------------------------------------
// report

struct SweepRow {
  std::string strategy, k_or_rho;
  std::uint64_t seed = 0;
  double r1 = 0, r5 = 0, r10 = 0, medr = 0, precision = 0, recall = 0;
};

std::vector<SweepRow> read_sweep_csv(const std::string& path) {
  std::ifstream file(path);
  if (!file) throw IoError(path + ": cannot open");
  std::string line;
  if (!std::getline(file, line)) throw IoError(path + ": empty file");
  if (!line.empty() && line.back() == '\r') line.pop_back();
  const std::string expected =
      "strategy,k_or_rho,seed,r1,r5,r10,medr,selector_precision,selector_recall";
  if (line != expected)
    throw IoError(path + ": line 1: header mismatch, expected '" + expected + "'");
  std::vector<SweepRow> rows;
  std::size_t line_no = 1;
  while (std::getline(file, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    const std::vector<std::string> fields = split_list(line);
    if (fields.size() != 9)
      throw IoError(path + ": line " + std::to_string(line_no) + ": expected 9 fields, got " +
                    std::to_string(fields.size()));
    SweepRow row;
    row.strategy = fields[0];
    row.k_or_rho = fields[1];
    try {
      row.seed = std::stoull(fields[2]);
      row.r1 = std::stod(fields[3]);
      row.r5 = std::stod(fields[4]);
      row.r10 = std::stod(fields[5]);
      row.medr = std::stod(fields[6]);
      row.precision = std::stod(fields[7]);
      row.recall = std::stod(fields[8]);
    } catch (const std::exception&) {
      throw IoError(path + ": line " + std::to_string(line_no) + ": non-numeric metric field");
    }
    rows.push_back(std::move(row));
  }
  return rows;
}

std::string render_table(const std::vector<std::vector<std::string>>& cells) {
  std::vector<std::size_t> width;
  for (const auto& row : cells) {
    if (width.size() < row.size()) width.resize(row.size(), 0);
    for (std::size_t i = 0; i < row.size(); ++i) width[i] = std::max(width[i], row[i].size());
  }
  std::string out;
  for (const auto& row : cells) {
    for (std::size_t i = 0; i < row.size(); ++i) {
      if (i > 0) out += "  ";
      out += row[i];
      // Pad to the column width (skip trailing spaces on the last column).
      if (i + 1 < row.size()) out.append(width[i] - row[i].size(), ' ');
    }
    out += "\n";
  }
  return out;
}

std::string format_metric(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.2f", v);
  return buf;
}

struct ReportArgs {
  std::string in, out;
};

int cmd_report(const ReportArgs& a) {
  const std::vector<SweepRow> rows = read_sweep_csv(a.in);
  if (rows.empty()) throw IoError(a.in + ": no data rows");

  // Per-run table, then means over seeds per (strategy, k_or_rho) cell.
  std::vector<std::vector<std::string>> table;
  table.push_back({"strategy", "k_or_rho", "seed", "r1", "r5", "r10", "medr",
                   "selector_precision", "selector_recall"});
  for (const SweepRow& r : rows)
    table.push_back({r.strategy, r.k_or_rho.empty() ? "-" : r.k_or_rho, std::to_string(r.seed),
                     format_metric(r.r1), format_metric(r.r5), format_metric(r.r10),
                     format_metric(r.medr), format_metric(r.precision),
                     format_metric(r.recall)});

  struct Cell {
    int runs = 0;
    double r1 = 0, r5 = 0, r10 = 0, medr = 0, precision = 0, recall = 0;
  };
  std::vector<std::pair<std::pair<std::string, std::string>, Cell>> cells;  // insertion order
  for (const SweepRow& r : rows) {
    const std::pair<std::string, std::string> key{r.strategy, r.k_or_rho};
    auto it = std::find_if(cells.begin(), cells.end(),
                           [&key](const auto& c) { return c.first == key; });
    if (it == cells.end()) it = cells.insert(cells.end(), {key, Cell{}});
    Cell& c = it->second;
    ++c.runs;
    c.r1 += r.r1;
    c.r5 += r.r5;
    c.r10 += r.r10;
    c.medr += r.medr;
    c.precision += r.precision;
    c.recall += r.recall;
  }
  std::vector<std::vector<std::string>> means;
  means.push_back({"strategy", "k_or_rho", "runs", "mean_r1", "mean_r5", "mean_r10", "mean_medr",
                   "mean_selector_precision", "mean_selector_recall"});
  for (const auto& [key, c] : cells) {
    const double n = c.runs;
    means.push_back({key.first, key.second.empty() ? "-" : key.second, std::to_string(c.runs),
                     format_metric(c.r1 / n), format_metric(c.r5 / n), format_metric(c.r10 / n),
                     format_metric(c.medr / n), format_metric(c.precision / n),
                     format_metric(c.recall / n)});
  }
  write_text_file(a.out + ".table.txt",
                  render_table(table) + "\nmeans over seeds\n" + render_table(means));

  // R@1-vs-k line chart over the fixed_k cells.
  struct Point {
    double k, r1;
  };
  std::vector<Point> points;
  for (const auto& [key, c] : cells) {
    if (key.first != "fixed_k") continue;
    try {
      points.push_back({std::stod(key.second), c.r1 / c.runs});
    } catch (const std::exception&) {
      throw IoError(a.in + ": fixed_k row with non-numeric k '" + key.second + "'");
    }
  }
  std::sort(points.begin(), points.end(), [](const Point& a, const Point& b) { return a.k < b.k; });

  const double width = 640, height = 400, left = 70, right = 30, top = 40, bottom = 60;
  const double plot_w = width - left - right, plot_h = height - top - bottom;
  double k_lo = 0, k_hi = 1;
  if (!points.empty()) {
    k_lo = points.front().k;
    k_hi = points.back().k;
    if (k_hi == k_lo) {
      k_lo -= 1;
      k_hi += 1;
    }
  }
  auto x_of = [&](double k) { return left + (k - k_lo) / (k_hi - k_lo) * plot_w; };
  auto y_of = [&](double r1) { return top + (100.0 - r1) / 100.0 * plot_h; };
  auto num = [](double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.2f", v);
    return std::string(buf);
  };

  std::string svg;
  svg += "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" + num(width) + "\" height=\"" +
         num(height) + "\" font-family=\"monospace\" font-size=\"12\">\n";
  svg += "  <rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  svg += "  <text x=\"" + num(left) + "\" y=\"20\">R@1 vs frames kept (fixed_k, mean over seeds)"
         "</text>\n";
  svg += "  <line x1=\"" + num(left) + "\" y1=\"" + num(top) + "\" x2=\"" + num(left) + "\" y2=\"" +
         num(top + plot_h) + "\" stroke=\"black\"/>\n";
  svg += "  <line x1=\"" + num(left) + "\" y1=\"" + num(top + plot_h) + "\" x2=\"" +
         num(left + plot_w) + "\" y2=\"" + num(top + plot_h) + "\" stroke=\"black\"/>\n";
  for (int tick = 0; tick <= 100; tick += 20) {
    const double y = y_of(tick);
    svg += "  <line x1=\"" + num(left - 4) + "\" y1=\"" + num(y) + "\" x2=\"" + num(left) +
           "\" y2=\"" + num(y) + "\" stroke=\"black\"/>\n";
    svg += "  <text x=\"" + num(left - 40) + "\" y=\"" + num(y + 4) + "\">" +
           std::to_string(tick) + "</text>\n";
  }
  svg += "  <text x=\"" + num(left + plot_w / 2 - 60) + "\" y=\"" + num(height - 16) +
         "\">frames kept (k)</text>\n";
  if (points.empty()) {
    svg += "  <text x=\"" + num(left + 20) + "\" y=\"" + num(top + plot_h / 2) +
           "\">no fixed_k rows in input</text>\n";
  } else {
    std::string polyline;
    for (const Point& p : points)
      polyline += num(x_of(p.k)) + "," + num(y_of(p.r1)) + " ";
    svg += "  <polyline points=\"" + polyline + "\" fill=\"none\" stroke=\"steelblue\" "
           "stroke-width=\"2\"/>\n";
    for (const Point& p : points) {
      svg += "  <circle cx=\"" + num(x_of(p.k)) + "\" cy=\"" + num(y_of(p.r1)) +
             "\" r=\"4\" fill=\"steelblue\"/>\n";
      svg += "  <text x=\"" + num(x_of(p.k) - 12) + "\" y=\"" + num(y_of(p.r1) - 10) + "\">" +
             num(p.r1) + "</text>\n";
      svg += "  <text x=\"" + num(x_of(p.k) - 8) + "\" y=\"" + num(top + plot_h + 16) + "\">" +
             num(p.k) + "</text>\n";
    }
  }
  svg += "</svg>\n";
  write_text_file(a.out + ".r1_vs_k.svg", svg);
  write_echo(a.out + ".config.txt", "report", {{"in", a.in}, {"out", a.out}});
  return 0;
}

}  // namespace

int run_cli(std::vector<std::string> args) {
  CLI::App app{"fine-grained video-text contrastive engine"};
  app.name("fineco");
  app.require_subcommand(1);

  GenDataArgs gen;
  CLI::App* gen_cmd = app.add_subcommand("gen-data", "synthesize a planted-relevance dataset");
  gen_cmd->add_option("--out", gen.out, "output base path")->required();
  gen_cmd->add_option("--pairs", gen.spec.num_pairs, "number of video-text pairs")->required();
  gen_cmd->add_option("--topics", gen.spec.num_topics, "number of latent topics");
  gen_cmd->add_option("--frames", gen.spec.frames_per_video, "frames per video")->required();
  gen_cmd->add_option("--dim", gen.spec.feature_dim, "frame feature width");
  gen_cmd->add_option("--tokens", gen.spec.tokens_per_text, "tokens per text");
  gen_cmd->add_option("--vocab", gen.spec.vocab_size, "vocabulary size");
  gen_cmd->add_option("--relevant-fraction", gen.spec.relevant_fraction,
                      "fraction of frames planted as relevant");
  gen_cmd->add_option("--noise-std", gen.spec.noise_std, "noise around topic prototypes");
  gen_cmd->add_option("--seed", gen.spec.seed, "generation seed");
  gen_cmd->add_option("--split", gen.split,
                      "write the first N pairs to <out>.train and the rest to <out>.test");

  TrainArgs tr;
  CLI::App* train_cmd = app.add_subcommand("train", "fit a model and write checkpoint + loss log");
  train_cmd->add_option("--data", tr.data, "training dataset base path")->required();
  train_cmd->add_option("--out", tr.out, "output base path")->required();
  train_cmd->add_option("--val", tr.val, "validation dataset base path");
  train_cmd->add_option("--resume", tr.resume, "checkpoint to continue from");
  train_cmd->add_option("--stop-after-step", tr.stop_after_step,
                        "halt after this step and checkpoint there (0 = run to completion)");
  tr.options.attach(*train_cmd);

  EvalArgs ev;
  CLI::App* eval_cmd = app.add_subcommand("eval", "score a checkpoint and write a metrics CSV");
  eval_cmd->add_option("--ckpt", ev.ckpt, "checkpoint path")->required();
  eval_cmd->add_option("--data", ev.data, "evaluation dataset base path")->required();
  eval_cmd->add_option("--out", ev.out, "output base path")->required();
  eval_cmd->add_option("--task", ev.task_text, "retrieval | qa (defaults to the trained task)");
  eval_cmd->add_flag("--dual-softmax", ev.dual_softmax,
                     "re-rank retrieval scores with dual softmax");

  SweepArgs sw;
  CLI::App* sweep_cmd =
      app.add_subcommand("sweep", "train/eval a strategy grid across seeds into an ablation CSV");
  sweep_cmd->add_option("--data", sw.data, "training dataset base path")->required();
  sweep_cmd->add_option("--test", sw.test, "evaluation dataset base path")->required();
  sweep_cmd->add_option("--out", sw.out, "output base path")->required();
  sweep_cmd->add_option("--grid", sw.grid_text,
                        "comma-separated strategies, e.g. fixed_k:1,fixed_k:7,median")
      ->required();
  sweep_cmd->add_option("--seeds", sw.seeds_text, "comma-separated seeds, e.g. 1,2,3")->required();
  sw.options.attach(*sweep_cmd);

  ReportArgs rp;
  CLI::App* report_cmd =
      app.add_subcommand("report", "render a sweep CSV as a table and an SVG chart");
  report_cmd->add_option("--in", rp.in, "sweep CSV path")->required();
  report_cmd->add_option("--out", rp.out, "output base path")->required();

  try {
    std::reverse(args.begin(), args.end());
    app.parse(args);
    if (gen_cmd->parsed()) return cmd_gen_data(gen);
    if (train_cmd->parsed()) return cmd_train(tr);
    if (eval_cmd->parsed()) return cmd_eval(ev);
    if (sweep_cmd->parsed()) return cmd_sweep(sw);
    if (report_cmd->parsed()) return cmd_report(rp);
    throw UsageError("no command given");
  } catch (const CLI::CallForHelp&) {
    std::cout << app.help();
    return 0;
  } catch (const CLI::CallForAllHelp&) {
    std::cout << app.help("", CLI::AppFormatMode::All);
    return 0;
  } catch (const CLI::ParseError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  } catch (const UsageError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  } catch (const std::invalid_argument& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  } catch (const NumericError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 3;
  } catch (const IoError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
}

}  // namespace fineco
