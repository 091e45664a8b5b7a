// Copyright 2026 The prosodyrl Authors
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

#include "prosodyrl/cli.h"

#include <algorithm>
#include <cstdio>
#include <fstream>
#include <ostream>
#include <sstream>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "prosodyrl/audio_io.h"
#include "prosodyrl/corpus.h"
#include "prosodyrl/error.h"
#include "prosodyrl/policy.h"

namespace prosodyrl {
namespace {

using nlohmann::ordered_json;

// Thrown for problems that are the caller's fault but only detectable after
// parsing (bad label in a list, inconsistent settings, ...).
struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

std::vector<std::string> split(const std::string& s, char sep) {
  std::vector<std::string> out;
  std::string cur;
  std::istringstream in(s);
  while (std::getline(in, cur, sep)) out.push_back(cur);
  return out;
}

std::vector<int> parse_index_list(const std::string& s) {
  std::vector<int> out;
  for (const std::string& tok : split(s, ',')) {
    try {
      std::size_t used = 0;
      const int v = std::stoi(tok, &used);
      if (used != tok.size()) throw std::invalid_argument(tok);
      out.push_back(v);
    } catch (const std::logic_error&) {
      throw UsageError("not an integer list: " + s);
    }
  }
  if (out.empty()) throw UsageError("empty index list");
  return out;
}

VadVector parse_vad(const std::string& s) {
  const auto parts = split(s, ',');
  if (parts.size() != 3) throw UsageError("--vad expects valence,arousal,dominance");
  double x[3];
  for (int i = 0; i < 3; ++i) {
    try {
      std::size_t used = 0;
      x[i] = std::stod(parts[i], &used);
      if (used != parts[i].size()) throw std::invalid_argument(parts[i]);
    } catch (const std::logic_error&) {
      throw UsageError("--vad component is not a number: " + parts[i]);
    }
  }
  VadVector v{x[0], x[1], x[2]};
  try {
    v.validate();
  } catch (const Error& e) {
    throw UsageError(std::string("--vad: ") + e.what());
  }
  return v;
}

Emotion require_emotion(const std::string& s, const char* flag) {
  const auto e = parse_emotion(s);
  if (!e) throw UsageError(std::string(flag) + ": unknown emotion '" + s + "'");
  return *e;
}

Intensity require_intensity(const std::string& s, const char* flag) {
  const auto r = parse_intensity(s);
  if (!r) throw UsageError(std::string(flag) + ": unknown intensity '" + s + "'");
  return *r;
}

std::string path_or(const std::filesystem::path& p, const std::filesystem::path& base,
                    const char* suffix) {
  return p.empty() ? base.string() + suffix : p.string();
}

// Turns config-file entries into extra command-line arguments for options
// the command line did not set. Top-level scalar keys apply to any command
// that has a matching option; an object keyed by the command name applies
// to that command only and must not contain unknown keys.
void apply_config(const std::filesystem::path& path, const CLI::App& cmd,
                  const std::string& section, std::vector<std::string>& args) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorKind::kIo, "cannot open config " + path.string());
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(in);
  } catch (const nlohmann::json::exception&) {
    throw UsageError("config " + path.string() + " is not valid JSON");
  }
  if (!j.is_object()) throw UsageError("config must be a JSON object");

  const auto given = [&](const std::string& flag) {
    return std::any_of(args.begin(), args.end(), [&](const std::string& a) {
      return a == flag || a.rfind(flag + "=", 0) == 0;
    });
  };
  const auto value_text = [](const nlohmann::json& v) -> std::string {
    if (v.is_string()) return v.get<std::string>();
    if (v.is_array()) {
      std::string s;
      for (const auto& x : v) {
        if (!s.empty()) s += ',';
        s += x.is_string() ? x.get<std::string>() : x.dump();
      }
      return s;
    }
    return v.dump();
  };
  const auto apply = [&](const std::string& key, const nlohmann::json& v, bool strict) {
    const std::string flag = "--" + key;
    const CLI::Option* opt = cmd.get_option_no_throw(flag);
    if (opt == nullptr || key == "config") {
      if (strict) throw UsageError("config key '" + key + "' is not an option of " + section);
      return;
    }
    if (given(flag)) return;
    if (opt->get_type_size() == 0) {
      if (v.is_boolean() && v.get<bool>()) args.push_back(flag);
      return;
    }
    args.push_back(flag);
    args.push_back(value_text(v));
  };

  for (const auto& [key, v] : j.items()) {
    if (v.is_object()) {
      if (key != section) continue;
      for (const auto& [k2, v2] : v.items()) apply(k2, v2, true);
    } else {
      apply(key, v, false);
    }
  }
}

void write_text(const std::filesystem::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(ErrorKind::kIo, "cannot write " + path.string());
  out << text;
  if (!out) throw Error(ErrorKind::kIo, "failed writing " + path.string());
}

ordered_json breakdown_json(const RewardBreakdown& b) {
  ordered_json j;
  j["r_ser"] = b.r_ser;
  j["d"] = b.d;
  j["r_match"] = b.r_match;
  j["r_dist"] = b.r_dist;
  j["r_int"] = b.r_int;
  ordered_json words = ordered_json::array();
  for (const WordEmphasis& w : b.per_word_emphasis) {
    ordered_json e;
    e["hard_pitch"] = w.hard_pitch;
    e["hard_energy"] = w.hard_energy;
    e["soft_pitch"] = w.soft_pitch;
    e["soft_energy"] = w.soft_energy;
    words.push_back(e);
  }
  j["per_word_emphasis"] = words;
  j["r_emp"] = b.r_emp;
  j["total"] = b.total;
  return j;
}

struct Options {
  RunConfig cfg;
  std::string config_path;

  // gen-corpus
  int n = 1000;

  // grpo
  std::string ratio = "old";

  // score
  std::string audio, alignment, emotion, intensity, emphasis, vad, ser;

  // eval
  int m = 50;

  // env render
  std::string tokens;
  std::string wav_format = "float32";
  std::string alignment_out;

  // shared reward settings
  double t1 = 1.2, t2 = 2.4, sigma = 0.4;
  std::string aggregate = "mean";
};

void add_reward_options(CLI::App* c, Options& o) {
  c->add_option("--t1", o.t1, "weak/medium edge on VAD distance")->capture_default_str();
  c->add_option("--t2", o.t2, "medium/strong edge on VAD distance")->capture_default_str();
  c->add_option("--sigma", o.sigma, "width of the bin-centred Gaussian")->capture_default_str();
  c->add_option("--w-ser", o.cfg.weights.ser, "weight of the emotion reward")->capture_default_str();
  c->add_option("--w-int", o.cfg.weights.intensity, "weight of the intensity reward")->capture_default_str();
  c->add_option("--w-emp", o.cfg.weights.emphasis, "weight of the emphasis reward")->capture_default_str();
  c->add_option("--aggregate", o.aggregate, "emphasis aggregation over words")
      ->check(CLI::IsMember({"mean", "sum"}))
      ->capture_default_str();
}

void finish_reward_options(Options& o) {
  o.cfg.bins = bins_from_edges(o.t1, o.t2, o.sigma);
  o.cfg.bins.validate();
  o.cfg.emphasis_aggregate = o.aggregate == "sum" ? EmphasisAggregate::kSum : EmphasisAggregate::kMean;
}

void configure_env(RewardEnv& env, const RunConfig& cfg) {
  env.bins = cfg.bins;
  env.weights = cfg.weights;
  env.emphasis.aggregate = cfg.emphasis_aggregate;
  env.voice = cfg.voice;
}

int cmd_gen_corpus(const Options& o, std::ostream& out) {
  const auto prompts = generate_corpus(o.n, o.cfg.words_per_sentence, o.cfg.seed);
  write_corpus(o.cfg.out, prompts);
  out << "wrote " << prompts.size() << " prompts to " << o.cfg.out.string() << '\n';
  return kExitOk;
}

int cmd_sft(const Options& o, std::ostream& out) {
  const RunConfig& cfg = o.cfg;
  const auto prompts = read_corpus(cfg.corpus);
  if (prompts.empty()) throw Error(ErrorKind::kInvalidInput, "corpus " + cfg.corpus.string() + " is empty");
  ToyRewardEnv toy;
  configure_env(toy.env(), cfg);
  const TokenCodebook& codebook = toy.env().codebook;

  PolicyParams init(FeatureLayout{codebook.size(), cfg.voice.tokens_per_word});
  if (!cfg.init.empty()) init = load_checkpoint(cfg.init, codebook.hash());

  TeacherPolicy teacher = TeacherPolicy::toy_default();
  teacher.noise = cfg.teacher_noise;
  const auto examples = make_sft_examples(prompts, teacher, toy.env(), derive_seed(cfg.seed, "sft.teacher"));
  const SftResult r = sft_train(init, examples, cfg.sft);
  save_checkpoint(cfg.out, r.params, codebook.hash());

  std::ostringstream log;
  for (std::size_t e = 0; e < r.loss_curve.size(); ++e) {
    ordered_json j;
    j["epoch"] = e;
    j["loss"] = r.loss_curve[e];
    log << j.dump() << '\n';
  }
  write_text(path_or(cfg.log, cfg.out, ".loss.jsonl"), log.str());
  char buf[128];
  std::snprintf(buf, sizeof buf, "sft: %d epochs, final loss %.6f nats/token\n", cfg.sft.epochs, r.final_loss);
  out << buf;
  return kExitOk;
}

int cmd_grpo(Options& o, std::ostream& out) {
  RunConfig& cfg = o.cfg;
  cfg.grpo.ratio = o.ratio == "sft" ? RatioReference::kSft : RatioReference::kOld;
  cfg.grpo.seed = cfg.seed;
  cfg.grpo.validate();
  ToyRewardEnv toy;
  configure_env(toy.env(), cfg);
  const TokenCodebook& codebook = toy.env().codebook;
  const PolicyParams sft = load_checkpoint(cfg.init, codebook.hash());
  const auto prompts = read_corpus(cfg.corpus);
  if (prompts.empty()) throw Error(ErrorKind::kInvalidInput, "corpus " + cfg.corpus.string() + " is empty");

  const std::filesystem::path report_path = path_or(cfg.log, cfg.out, ".report.jsonl");
  std::ofstream report(report_path, std::ios::binary);
  if (!report) throw Error(ErrorKind::kIo, "cannot write " + report_path.string());
  const GrpoResult r = grpo_train(cfg.grpo, sft, toy.env(), prompts,
                                  [&](const StepRecord& rec) { write_step_record(report, rec); });
  report.close();
  if (!report) throw Error(ErrorKind::kIo, "failed writing " + report_path.string());
  save_checkpoint(cfg.out, r.params, codebook.hash());

  char buf[160];
  if (!r.report.empty()) {
    const StepRecord& last = r.report.back();
    std::snprintf(buf, sizeof buf, "grpo: %d steps, last mean reward %.4f, kl %.4f\n",
                  cfg.grpo.steps, last.mean_reward, last.kl);
  } else {
    std::snprintf(buf, sizeof buf, "grpo: 0 steps\n");
  }
  out << buf;
  return kExitOk;
}

int cmd_score(const Options& o, std::ostream& out) {
  const Emotion target_c = require_emotion(o.emotion, "--emotion");
  const Intensity target_r = require_intensity(o.intensity, "--intensity");
  const std::vector<int> emphasized = parse_index_list(o.emphasis);
  std::optional<VadVector> vad;
  if (!o.vad.empty()) vad = parse_vad(o.vad);
  std::optional<Emotion> ser;
  if (!o.ser.empty()) ser = require_emotion(o.ser, "--ser");

  const Waveform wave = read_wav(o.audio);
  wave.validate();
  const WordAlignment align = read_alignment(o.alignment);
  if (align.spans.empty()) throw Error(ErrorKind::kInvalidAlignment, "alignment has no words");
  align.validate(wave.duration());
  const std::vector<WordProsody> feats = analyze_words(wave, align);
  const UtteranceView view{wave, align, feats};

  ToyRewardEnv toy;
  configure_env(toy.env(), o.cfg);
  const RewardEnv& env = toy.env();
  const Emotion predicted = ser ? *ser : env.ser->classify(view).emotion;
  const VadVector v = vad ? *vad : env.vad->predict(view);
  const double d = vad_distance(v);
  const IntensityReward ir = intensity_reward(d, target_r, env.bins);
  const EmphasisReward er = emphasis_reward(feats, emphasized, sentence_stats(feats), env.emphasis);
  const RewardBreakdown b =
      composite_reward(ser_reward(predicted, target_c), d, ir, er, env.weights);

  ordered_json j = breakdown_json(b);
  j["emphasized_words"] = emphasized;
  j["predicted_emotion"] = std::string(to_string(predicted));
  j["intensity_bin"] = std::string(to_string(bin_of(d, env.bins)));
  j["vad"] = {v.valence, v.arousal, v.dominance};
  j["surrogate"] = {{"ser", !ser.has_value()}, {"vad", !vad.has_value()}};
  const std::string text = j.dump(2) + "\n";
  out << text;
  if (!o.cfg.out.empty()) write_text(o.cfg.out, text);
  return kExitOk;
}

int cmd_eval(const Options& o, std::ostream& out) {
  ToyRewardEnv toy;
  configure_env(toy.env(), o.cfg);
  const PolicyParams p = load_checkpoint(o.cfg.init, toy.env().codebook.hash());
  const EvalReport r = evaluate(p, toy.env(), o.m, o.cfg.seed, o.cfg.words_per_sentence);

  char buf[160];
  out << "emotion   intensity     n    ser    bin   hard  mean_d    sd_d\n";
  ordered_json cells = ordered_json::array();
  for (const CellMetrics& c : r.cells) {
    std::snprintf(buf, sizeof buf, "%-9s %-9s %5d  %5.3f  %5.3f  %5.3f  %6.4f  %6.4f\n",
                  std::string(to_string(c.emotion)).c_str(), std::string(to_string(c.intensity)).c_str(),
                  c.samples, c.ser_accuracy, c.intensity_accuracy, c.emphasis_hard_rate,
                  c.mean_distance, c.sd_distance);
    out << buf;
    ordered_json cj;
    cj["emotion"] = std::string(to_string(c.emotion));
    cj["intensity"] = std::string(to_string(c.intensity));
    cj["samples"] = c.samples;
    cj["ser_accuracy"] = c.ser_accuracy;
    cj["intensity_accuracy"] = c.intensity_accuracy;
    cj["emphasis_hard_rate"] = c.emphasis_hard_rate;
    cj["mean_distance"] = c.mean_distance;
    cj["sd_distance"] = c.sd_distance;
    cells.push_back(cj);
  }
  std::snprintf(buf, sizeof buf, "overall                  %5d  %5.3f  %5.3f  %5.3f\n",
                o.m * static_cast<int>(r.cells.size()), r.ser_accuracy, r.intensity_accuracy,
                r.emphasis_hard_rate);
  out << buf;
  if (!o.cfg.out.empty()) {
    ordered_json j;
    j["ser_accuracy"] = r.ser_accuracy;
    j["intensity_accuracy"] = r.intensity_accuracy;
    j["emphasis_hard_rate"] = r.emphasis_hard_rate;
    j["cells"] = cells;
    write_text(o.cfg.out, j.dump(2) + "\n");
  }
  return kExitOk;
}

int cmd_env_dump(const Options& o, std::ostream& out) {
  std::ostringstream s;
  dump_environment(s, o.cfg.voice);
  out << s.str();
  if (!o.cfg.out.empty()) write_text(o.cfg.out, s.str());
  return kExitOk;
}

int cmd_env_render(const Options& o, std::ostream& out) {
  TokenSequence z;
  for (int t : parse_index_list(o.tokens)) z.push_back(t);
  const int s = o.cfg.voice.tokens_per_word;
  if (z.size() % s != 0) {
    throw UsageError("--tokens needs a multiple of " + std::to_string(s) + " tokens");
  }
  std::vector<std::string> words;
  for (std::size_t i = 0; i < z.size() / s; ++i) words.push_back("w" + std::to_string(i));
  const Utterance u = decode_tokens(z, words, o.cfg.voice);
  write_wav(o.cfg.out, u.wave, o.wav_format == "pcm16" ? WavFormat::kPcm16 : WavFormat::kFloat32);
  const std::string align_path =
      o.alignment_out.empty() ? o.cfg.out.string() + ".tsv" : o.alignment_out;
  write_alignment(std::filesystem::path(align_path), u.alignment);
  out << "wrote " << o.cfg.out.string() << " and " << align_path << '\n';
  return kExitOk;
}

}  // namespace

IntensityBins bins_from_edges(double t1, double t2, double sigma) {
  IntensityBins b;
  b.t1 = t1;
  b.t2 = t2;
  b.midpoints = {t1 / 2.0, (t1 + t2) / 2.0, t2 + (t2 - t1) / 2.0};
  b.sigmas = {sigma, sigma, sigma};
  return b;
}

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  Options o;
  RunConfig& cfg = o.cfg;

  CLI::App app{"Emotion, intensity and emphasis control with GRPO on a toy speech environment",
               args.empty() ? "prosodyrl" : args[0]};
  app.require_subcommand(1);
  app.set_help_all_flag("--help-all", "Show help for every command");

  const auto config_opt = [&](CLI::App* c) {
    c->add_option("--config", o.config_path, "JSON config file; command-line flags take precedence");
  };

  CLI::App* gen = app.add_subcommand("gen-corpus", "Generate a synthetic prompt corpus");
  config_opt(gen);
  gen->add_option("--n", o.n, "number of prompts")->check(CLI::PositiveNumber)->capture_default_str();
  gen->add_option("--words", cfg.words_per_sentence, "words per sentence")
      ->check(CLI::Range(3, 1000))->capture_default_str();
  gen->add_option("--seed", cfg.seed, "run seed")->capture_default_str();
  gen->add_option("--out", cfg.out, "corpus file to write")->required();

  CLI::App* sft = app.add_subcommand("sft", "Supervised fine-tuning on teacher data");
  config_opt(sft);
  sft->add_option("--corpus", cfg.corpus, "corpus file")->required();
  sft->add_option("--epochs", cfg.sft.epochs, "full-batch epochs")->check(CLI::NonNegativeNumber)->capture_default_str();
  sft->add_option("--lr", cfg.sft.learning_rate, "learning rate")->check(CLI::NonNegativeNumber)->capture_default_str();
  sft->add_option("--noise", cfg.teacher_noise, "teacher per-token noise")->check(CLI::Range(0.0, 1.0))->capture_default_str();
  sft->add_option("--seed", cfg.seed, "run seed")->capture_default_str();
  sft->add_option("--init", cfg.init, "start from this checkpoint instead of zeros");
  sft->add_option("--out", cfg.out, "checkpoint to write")->required();
  sft->add_option("--log", cfg.log, "per-epoch loss log (default <out>.loss.jsonl)");

  CLI::App* grpo = app.add_subcommand("grpo", "GRPO fine-tuning from an SFT checkpoint");
  config_opt(grpo);
  grpo->add_option("--init", cfg.init, "SFT checkpoint (also the KL reference)")->required();
  grpo->add_option("--corpus", cfg.corpus, "corpus file")->required();
  grpo->add_option("--k", cfg.grpo.group_size, "group size")->check(CLI::Range(2, 1 << 20))->capture_default_str();
  grpo->add_option("--beta", cfg.grpo.beta, "KL coefficient")->check(CLI::NonNegativeNumber)->capture_default_str();
  grpo->add_option("--epsilon", cfg.grpo.epsilon, "clip radius")->check(CLI::PositiveNumber)->capture_default_str();
  grpo->add_option("--lr", cfg.grpo.learning_rate, "learning rate")->check(CLI::PositiveNumber)->capture_default_str();
  grpo->add_option("--steps", cfg.grpo.steps, "optimization steps")->check(CLI::NonNegativeNumber)->capture_default_str();
  grpo->add_option("--ratio", o.ratio, "ratio denominator: sft (reference) or old (sampling policy)")
      ->check(CLI::IsMember({"sft", "old"}))->capture_default_str();
  grpo->add_option("--seed", cfg.seed, "run seed")->capture_default_str();
  grpo->add_option("--out", cfg.out, "checkpoint to write")->required();
  grpo->add_option("--log", cfg.log, "training report (default <out>.report.jsonl)");
  add_reward_options(grpo, o);

  CLI::App* score = app.add_subcommand("score", "Score a WAV file against control targets");
  config_opt(score);
  score->add_option("--audio", o.audio, "mono WAV file")->required();
  score->add_option("--alignment", o.alignment, "word<TAB>start<TAB>end file")->required();
  score->add_option("--emotion", o.emotion, "target emotion")->required();
  score->add_option("--intensity", o.intensity, "target intensity")->required();
  score->add_option("--emphasis", o.emphasis, "comma-separated emphasized word indices")->required();
  score->add_option("--vad", o.vad, "external VAD vector valence,arousal,dominance");
  score->add_option("--ser", o.ser, "external emotion label");
  score->add_option("--out", cfg.out, "also write the report here");
  add_reward_options(score, o);

  CLI::App* eval = app.add_subcommand("eval", "Per-cell control accuracy of a checkpoint");
  config_opt(eval);
  eval->add_option("--checkpoint", cfg.init, "policy checkpoint")->required();
  eval->add_option("--m", o.m, "samples per (emotion, intensity) cell")->check(CLI::PositiveNumber)->capture_default_str();
  eval->add_option("--words", cfg.words_per_sentence, "words per sentence")->check(CLI::Range(3, 1000))->capture_default_str();
  eval->add_option("--seed", cfg.seed, "run seed")->capture_default_str();
  eval->add_option("--out", cfg.out, "also write JSON metrics here");
  add_reward_options(eval, o);

  CLI::App* env = app.add_subcommand("env", "Inspect the toy environment");
  env->require_subcommand(1);
  CLI::App* dump = env->add_subcommand("dump", "Print the codebook, maps and centroids");
  config_opt(dump);
  dump->add_option("--out", cfg.out, "also write the manifest here");
  CLI::App* render = env->add_subcommand("render", "Decode a token sequence to WAV and alignment");
  config_opt(render);
  render->add_option("--tokens", o.tokens, "comma-separated token ids")->required();
  render->add_option("--format", o.wav_format, "sample format")
      ->check(CLI::IsMember({"float32", "pcm16"}))->capture_default_str();
  render->add_option("--out", cfg.out, "WAV file to write")->required();
  render->add_option("--alignment-out", o.alignment_out, "alignment file (default <out>.tsv)");

  std::vector<std::string> argv(args.begin() + (args.empty() ? 0 : 1), args.end());
  try {
    // Locate the command and any --config before the real parse.
    CLI::App* chosen = nullptr;
    std::string section;
    std::size_t i = 0;
    for (; i < argv.size() && chosen == nullptr; ++i) {
      if (argv[i] == "env") {
        if (i + 1 < argv.size()) {
          if (argv[i + 1] == "dump") chosen = dump;
          if (argv[i + 1] == "render") chosen = render;
          section = argv[i + 1];
        }
        break;
      }
      for (CLI::App* c : {gen, sft, grpo, score, eval}) {
        if (argv[i] == c->get_name()) {
          chosen = c;
          section = c->get_name();
        }
      }
    }
    std::string config_path;
    for (std::size_t a = 0; a < argv.size(); ++a) {
      if (argv[a] == "--config" && a + 1 < argv.size()) config_path = argv[a + 1];
      if (argv[a].rfind("--config=", 0) == 0) config_path = argv[a].substr(9);
    }
    if (!config_path.empty() && chosen != nullptr) {
      apply_config(config_path, *chosen, section, argv);
    }

    std::reverse(argv.begin(), argv.end());
    app.parse(argv);
  } catch (const CLI::ParseError& e) {
    if (e.get_exit_code() == 0) {
      out << app.help();
      return kExitOk;
    }
    err << "error: " << e.what() << "\n\n" << app.help();
    return kExitUsage;
  } catch (const UsageError& e) {
    err << "error: " << e.what() << '\n';
    return kExitUsage;
  } catch (const Error& e) {
    err << "error: " << e.what() << '\n';
    return e.kind() == ErrorKind::kInvalidConfig ? kExitUsage : kExitRuntime;
  }

  try {
    finish_reward_options(o);
    if (gen->parsed()) return cmd_gen_corpus(o, out);
    if (sft->parsed()) return cmd_sft(o, out);
    if (grpo->parsed()) return cmd_grpo(o, out);
    if (score->parsed()) return cmd_score(o, out);
    if (eval->parsed()) return cmd_eval(o, out);
    if (dump->parsed()) return cmd_env_dump(o, out);
    if (render->parsed()) return cmd_env_render(o, out);
    err << app.help();
    return kExitUsage;
  } catch (const UsageError& e) {
    err << "error: " << e.what() << '\n';
    return kExitUsage;
  } catch (const Error& e) {
    err << "error: " << e.what() << '\n';
    return e.kind() == ErrorKind::kInvalidConfig ? kExitUsage : kExitRuntime;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return kExitRuntime;
  }
}

}  // namespace prosodyrl
