#include "motiontk/pipeline.hpp"

#include <algorithm>
#include <chrono>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <mutex>
#include <stdexcept>
#include <thread>

#include <CLI11.hpp>
#include <json.hpp>

#include "motiontk/errors.hpp"
#include "motiontk/metrics.hpp"
#include "motiontk/motion_io.hpp"
#include "motiontk/rng.hpp"
#include "motiontk/synthetic.hpp"

namespace mtk {

namespace {

namespace fs = std::filesystem;
using nlohmann::json;
using nlohmann::ordered_json;

std::uint64_t fnv1a(const std::string& s) {
  std::uint64_t h = 1469598103934665603ull;
  for (unsigned char c : s) {
    h ^= c;
    h *= 1099511628211ull;
  }
  return h;
}

double pick(const json& sec, const char* key, double fallback) {
  return sec.contains(key) ? sec.at(key).get<double>() : fallback;
}
int pick_int(const json& sec, const char* key, int fallback) {
  return sec.contains(key) ? sec.at(key).get<int>() : fallback;
}
bool pick_bool(const json& sec, const char* key, bool fallback) {
  return sec.contains(key) ? sec.at(key).get<bool>() : fallback;
}

void reject_unknown(const json& sec, std::initializer_list<const char*> known,
                    const std::string& where) {
  for (const auto& [key, value] : sec.items()) {
    if (std::find_if(known.begin(), known.end(), [&](const char* k) {
          return key == k;
        }) == known.end()) {
      throw ParseError("config: unknown key '" + key + "' in " + where);
    }
  }
}

json config_to_json(const PipelineConfig& c) {
  json doc;
  doc["seed"] = c.seed;
  doc["skeleton"] = c.skeleton_path;
  doc["out_dir"] = c.out_dir;
  doc["vae"] = {{"latent_dim", c.vae.latent_dim},
                {"hidden_dim", c.vae.hidden_dim},
                {"num_experts", c.vae.num_experts},
                {"gate_hidden", c.vae.gate_hidden},
                {"beta", c.vae.beta}};
  doc["train"] = {{"window", c.train.window},
                  {"warmup_epochs", c.train.warmup_epochs},
                  {"supervised_epochs", c.train.supervised_epochs},
                  {"transition_epochs", c.train.transition_epochs},
                  {"autoregressive_epochs", c.train.autoregressive_epochs},
                  {"lr_warmup_start", c.train.lr_warmup_start},
                  {"lr_warmup_end", c.train.lr_warmup_end},
                  {"lr_decay", c.train.lr_decay},
                  {"batch", c.train.batch}};
  doc["augment"] = {{"n", c.n_augment},
                    {"best_of", c.augment.best_of},
                    {"d_p", c.augment.d_p},
                    {"d_v", c.augment.d_v},
                    {"deterministic", c.augment.deterministic}};
  doc["physopt"] = {{"k_lambda", c.phys.k_lambda},
                    {"k_root", c.phys.k_root},
                    {"k_joint", c.phys.k_joint},
                    {"delta", c.phys.delta},
                    {"mu", c.phys.mu},
                    {"d_min", c.phys.d_min},
                    {"kp_rot", c.gains.k_p_rot},
                    {"kd_rot", c.gains.k_d_rot},
                    {"kp_pos", c.gains.k_p_pos},
                    {"kd_pos", c.gains.k_d_pos}};
  doc["imu"] = {{"sites", c.imu.sites}, {"with_gravity", c.imu.with_gravity}};
  return doc;
}

PipelineConfig config_from_json(const json& doc) {
  reject_unknown(doc,
                 {"seed", "skeleton", "out_dir", "vae", "train", "augment",
                  "physopt", "imu"},
                 "the top level");
  if (!doc.contains("seed")) throw ParseError("config: 'seed' is mandatory");

  PipelineConfig c;
  c.seed = doc.at("seed").get<std::uint64_t>();
  if (doc.contains("skeleton")) c.skeleton_path = doc.at("skeleton").get<std::string>();
  if (doc.contains("out_dir")) c.out_dir = doc.at("out_dir").get<std::string>();

  if (doc.contains("vae")) {
    const json& v = doc.at("vae");
    reject_unknown(v, {"latent_dim", "hidden_dim", "num_experts", "gate_hidden", "beta"},
                   "'vae'");
    c.vae.latent_dim = pick_int(v, "latent_dim", c.vae.latent_dim);
    c.vae.hidden_dim = pick_int(v, "hidden_dim", c.vae.hidden_dim);
    c.vae.num_experts = pick_int(v, "num_experts", c.vae.num_experts);
    c.vae.gate_hidden = pick_int(v, "gate_hidden", c.vae.gate_hidden);
    c.vae.beta = pick(v, "beta", c.vae.beta);
  }
  if (doc.contains("train")) {
    const json& t = doc.at("train");
    reject_unknown(t,
                   {"profile", "window", "warmup_epochs", "supervised_epochs",
                    "transition_epochs", "autoregressive_epochs",
                    "lr_warmup_start", "lr_warmup_end", "lr_decay", "batch"},
                   "'train'");
    if (t.contains("profile")) {
      const std::string p = t.at("profile").get<std::string>();
      if (p == "desk") {
        c.train = TrainConfig::desk();
      } else if (p != "full") {
        throw ParseError("config: train profile must be 'desk' or 'full'");
      }
    }
    c.train.window = pick_int(t, "window", c.train.window);
    c.train.warmup_epochs = pick_int(t, "warmup_epochs", c.train.warmup_epochs);
    c.train.supervised_epochs =
        pick_int(t, "supervised_epochs", c.train.supervised_epochs);
    c.train.transition_epochs =
        pick_int(t, "transition_epochs", c.train.transition_epochs);
    c.train.autoregressive_epochs =
        pick_int(t, "autoregressive_epochs", c.train.autoregressive_epochs);
    c.train.lr_warmup_start = pick(t, "lr_warmup_start", c.train.lr_warmup_start);
    c.train.lr_warmup_end = pick(t, "lr_warmup_end", c.train.lr_warmup_end);
    c.train.lr_decay = pick(t, "lr_decay", c.train.lr_decay);
    c.train.batch = pick_int(t, "batch", c.train.batch);
  }
  if (doc.contains("augment")) {
    const json& a = doc.at("augment");
    reject_unknown(a, {"n", "best_of", "d_p", "d_v", "deterministic"}, "'augment'");
    c.n_augment = pick_int(a, "n", c.n_augment);
    c.augment.best_of = pick_int(a, "best_of", c.augment.best_of);
    c.augment.d_p = pick(a, "d_p", c.augment.d_p);
    c.augment.d_v = pick(a, "d_v", c.augment.d_v);
    c.augment.deterministic = pick_bool(a, "deterministic", c.augment.deterministic);
    if (c.n_augment < 1) throw ParseError("config: augment.n must be >= 1");
  }
  if (doc.contains("physopt")) {
    const json& p = doc.at("physopt");
    reject_unknown(p,
                   {"k_lambda", "k_root", "k_joint", "delta", "mu", "d_min",
                    "kp_rot", "kd_rot", "kp_pos", "kd_pos"},
                   "'physopt'");
    c.phys.k_lambda = pick(p, "k_lambda", c.phys.k_lambda);
    c.phys.k_root = pick(p, "k_root", c.phys.k_root);
    c.phys.k_joint = pick(p, "k_joint", c.phys.k_joint);
    c.phys.delta = pick(p, "delta", c.phys.delta);
    c.phys.mu = pick(p, "mu", c.phys.mu);
    c.phys.d_min = pick(p, "d_min", c.phys.d_min);
    c.gains.k_p_rot = pick(p, "kp_rot", c.gains.k_p_rot);
    c.gains.k_d_rot = pick(p, "kd_rot", c.gains.k_d_rot);
    c.gains.k_p_pos = pick(p, "kp_pos", c.gains.k_p_pos);
    c.gains.k_d_pos = pick(p, "kd_pos", c.gains.k_d_pos);
  }
  if (doc.contains("imu")) {
    const json& m = doc.at("imu");
    reject_unknown(m, {"sites", "with_gravity"}, "'imu'");
    if (m.contains("sites")) {
      const auto& sites = m.at("sites");
      if (!sites.is_array() || sites.size() != 6) {
        throw ParseError("config: imu.sites must list 6 joint indices");
      }
      for (size_t i = 0; i < 6; ++i) c.imu.sites[i] = sites[i].get<int>();
    }
    c.imu.with_gravity = pick_bool(m, "with_gravity", c.imu.with_gravity);
    try {
      c.imu.validate();
    } catch (const std::invalid_argument& e) {
      throw ParseError(std::string("config: ") + e.what());
    }
  }
  return c;
}

// ---------------------------------------------------------------------------
// subcommand plumbing
// ---------------------------------------------------------------------------

std::mutex g_log_mutex;

void log_line(const std::string& msg) {
  std::lock_guard<std::mutex> lock(g_log_mutex);
  std::cerr << "[motiontk] " << msg << "\n";
}

class Stopwatch {
 public:
  Stopwatch() : start_(std::chrono::steady_clock::now()), last_(start_) {}
  double lap() {
    const auto now = std::chrono::steady_clock::now();
    const double ms = std::chrono::duration<double, std::milli>(now - last_).count();
    last_ = now;
    return ms;
  }
  double total() const {
    return std::chrono::duration<double, std::milli>(
               std::chrono::steady_clock::now() - start_)
        .count();
  }

 private:
  std::chrono::steady_clock::time_point start_, last_;
};

// every subcommand carries these
struct Common {
  std::string config_path;
  std::uint64_t seed = 1;
  CLI::Option* seed_opt = nullptr;

  // config file first, then explicit flags on top
  PipelineConfig resolve() const {
    PipelineConfig cfg;
    if (!config_path.empty()) {
      cfg = load_config(config_path);
    } else {
      cfg.seed = seed;
    }
    if (seed_opt != nullptr && seed_opt->count() > 0) cfg.seed = seed;
    return cfg;
  }
};

void add_common(CLI::App* cmd, Common& c) {
  cmd->add_option("--config", c.config_path, "pipeline config JSON file");
  c.seed_opt = cmd->add_option("--seed", c.seed, "root random seed");
}

std::string sample_name(int k) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "sample_%02d", k);
  return buf;
}

std::vector<std::string> collect_motion_files(const std::vector<std::string>& args) {
  std::vector<std::string> files;
  for (const std::string& a : args) {
    if (fs::is_directory(a)) {
      std::vector<std::string> found;
      for (const auto& entry : fs::directory_iterator(a)) {
        const std::string p = entry.path().string();
        if (p.size() > 12 && p.substr(p.size() - 12) == ".motion.json") {
          found.push_back(p);
        }
      }
      std::sort(found.begin(), found.end());
      files.insert(files.end(), found.begin(), found.end());
    } else {
      files.push_back(a);
    }
  }
  return files;
}

// ---------------------------------------------------------------------------
// subcommands
// ---------------------------------------------------------------------------

void cmd_gen(const Common& common, const std::string& kind, double seconds,
             double fps, const std::string& out) {
  Stopwatch sw;
  const PipelineConfig cfg = common.resolve();
  const Skeleton skel = pipeline_skeleton(cfg);
  const PoseSequence seq =
      (kind == "stepping") ? gen_stepping(skel, seconds, fps, cfg.seed)
                           : gen_synthetic(skel, kind, seconds, fps, cfg.seed);
  const double gen_ms = sw.lap();
  save_motion(seq, out);
  log_line("gen-synthetic: " + std::to_string(seq.poses.size()) + " frames of '" +
           kind + "' -> " + out);
  write_manifest(out + ".manifest.json", "gen-synthetic", cfg, {},
                 {fs::path(out).filename().string()},
                 {{"generate", gen_ms}, {"total", sw.total()}});
}

void cmd_train(const Common& common, const std::vector<std::string>& data,
               const std::string& out, const std::string& loss_csv) {
  Stopwatch sw;
  const PipelineConfig cfg = common.resolve();
  const Skeleton skel = pipeline_skeleton(cfg);
  std::vector<std::vector<MotionFrame>> corpus;
  for (const std::string& path : data) {
    const PoseSequence seq = load_motion(path);
    ensure_matches(skel, seq);
    corpus.push_back(build_frames(skel, seq));
  }
  const double load_ms = sw.lap();

  VaeModel model(cfg.vae, cfg.seed);
  TrainConfig tc = cfg.train;
  tc.seed = cfg.seed;
  log_line("train-vae: " + std::to_string(corpus.size()) + " sequence(s), " +
           std::to_string(model.param_count()) + " parameters, " +
           std::to_string(tc.total_epochs()) + " epochs");
  const std::vector<LossRow> rows = train_vae(model, corpus, tc);
  const double train_ms = sw.lap();

  save_vae(model, out);
  if (!loss_csv.empty()) save_loss_csv(rows, loss_csv);
  log_line("train-vae: final loss " +
           (rows.empty() ? std::string("n/a")
                         : std::to_string(rows.back().loss_reconst)) +
           " -> " + out);
  std::vector<std::string> outputs{fs::path(out).filename().string()};
  if (!loss_csv.empty()) outputs.push_back(fs::path(loss_csv).filename().string());
  write_manifest(out + ".manifest.json", "train-vae", cfg, data, outputs,
                 {{"load", load_ms}, {"train", train_ms}, {"total", sw.total()}});
}

void cmd_augment(const Common& common, const std::string& model_path,
                 const std::string& input, int n, bool physopt, int jobs,
                 const std::string& out_dir, CLI::Option* n_opt) {
  Stopwatch sw;
  PipelineConfig cfg = common.resolve();
  if (n_opt->count() > 0) cfg.n_augment = n;
  if (cfg.n_augment < 1) throw std::invalid_argument("augment: --n must be >= 1");
  const Skeleton skel = pipeline_skeleton(cfg);

  VaeModel model = load_vae(model_path);
  const PoseSequence ref = load_motion(input);
  ensure_matches(skel, ref);
  const std::vector<MotionFrame> ref_frames = build_frames(skel, ref);
  fs::create_directories(out_dir);
  const double load_ms = sw.lap();

  const int total = cfg.n_augment;
  const int workers = std::clamp(jobs, 1, total);
  std::vector<std::exception_ptr> errors(total);
  std::vector<std::string> outputs;
  std::mutex out_mutex;

  auto one_sample = [&](int k, VaeModel& local_model) {
    Rng rng(Rng::derive_seed(cfg.seed, std::uint64_t(k)));
    const std::vector<MotionFrame> frames =
        augment_frames(local_model, ref_frames, cfg.augment, rng);
    PoseSequence aug = frames_to_poses(skel, frames, ref.fps);
    aug.skeleton = ref.skeleton;
    const std::string base = sample_name(k);
    std::vector<std::string> names;
    if (physopt) {
      RigidBodyModel rb = RigidBodyModel::from_skeleton(skel);
      auto [opt, trace] = optimize_sequence(rb, aug, cfg.phys, cfg.gains);
      save_motion(opt, (fs::path(out_dir) / (base + ".motion.json")).string());
      save_forces_csv(trace, (fs::path(out_dir) / (base + ".forces.csv")).string());
      save_torques_csv(trace, (fs::path(out_dir) / (base + ".torques.csv")).string());
      names = {base + ".motion.json", base + ".forces.csv", base + ".torques.csv"};
      log_line("augment: " + base + " optimized, " +
               std::to_string(trace.fallback_count()) + " fallback frame(s)");
    } else {
      save_motion(aug, (fs::path(out_dir) / (base + ".motion.json")).string());
      names = {base + ".motion.json"};
      log_line("augment: " + base + " written");
    }
    std::lock_guard<std::mutex> lock(out_mutex);
    outputs.insert(outputs.end(), names.begin(), names.end());
  };

  if (workers == 1) {
    for (int k = 0; k < total; ++k) one_sample(k, model);
  } else {
    std::vector<std::thread> pool;
    for (int w = 0; w < workers; ++w) {
      pool.emplace_back([&, w] {
        try {
          VaeModel local = load_vae(model_path);  // private instance per worker
          for (int k = w; k < total; k += workers) {
            try {
              one_sample(k, local);
            } catch (...) {
              errors[k] = std::current_exception();
            }
          }
        } catch (...) {
          for (int k = w; k < total; k += workers) {
            if (!errors[k]) errors[k] = std::current_exception();
          }
        }
      });
    }
    for (std::thread& t : pool) t.join();
    for (int k = 0; k < total; ++k) {
      if (errors[k]) std::rethrow_exception(errors[k]);
    }
  }
  const double work_ms = sw.lap();

  std::sort(outputs.begin(), outputs.end());
  write_manifest((fs::path(out_dir) / "run-manifest.json").string(), "augment",
                 cfg, {model_path, input}, outputs,
                 {{"load", load_ms},
                  {physopt ? "augment+physopt" : "augment", work_ms},
                  {"total", sw.total()}});
}

void cmd_optimize(const Common& common, const std::string& input,
                  const std::string& out, const std::string& forces,
                  const std::string& torques) {
  Stopwatch sw;
  const PipelineConfig cfg = common.resolve();
  const Skeleton skel = pipeline_skeleton(cfg);
  const PoseSequence ref = load_motion(input);
  ensure_matches(skel, ref);
  const double load_ms = sw.lap();

  RigidBodyModel rb = RigidBodyModel::from_skeleton(skel);
  auto [opt, trace] = optimize_sequence(rb, ref, cfg.phys, cfg.gains);
  const double opt_ms = sw.lap();

  save_motion(opt, out);
  std::vector<std::string> outputs{fs::path(out).filename().string()};
  if (!forces.empty()) {
    save_forces_csv(trace, forces);
    outputs.push_back(fs::path(forces).filename().string());
  }
  if (!torques.empty()) {
    save_torques_csv(trace, torques);
    outputs.push_back(fs::path(torques).filename().string());
  }
  log_line("optimize: " + std::to_string(ref.poses.size()) + " frames, " +
           std::to_string(trace.fallback_count()) + " fallback frame(s) -> " + out);
  write_manifest(out + ".manifest.json", "optimize", cfg, {input}, outputs,
                 {{"load", load_ms}, {"optimize", opt_ms}, {"total", sw.total()}});
}

void cmd_synth_imu(const Common& common, const std::string& input,
                   const std::string& out, bool with_gravity,
                   CLI::Option* grav_opt) {
  Stopwatch sw;
  PipelineConfig cfg = common.resolve();
  if (grav_opt->count() > 0) cfg.imu.with_gravity = with_gravity;
  const Skeleton skel = pipeline_skeleton(cfg);
  const PoseSequence seq = load_motion(input);
  ensure_matches(skel, seq);
  const ImuSequence imu = synthesize_imu(skel, seq, cfg.imu);
  const double synth_ms = sw.lap();
  save_imu(imu, out);
  log_line("synth-imu: " + std::to_string(imu.frames.size()) + " frames -> " + out);
  write_manifest(out + ".manifest.json", "synth-imu", cfg, {input},
                 {fs::path(out).filename().string()},
                 {{"synthesize", synth_ms}, {"total", sw.total()}});
}

void cmd_eval(const Common& common, const std::string& gt_path,
              const std::vector<std::string>& aug_args, const std::string& out,
              const std::string& csv) {
  Stopwatch sw;
  const PipelineConfig cfg = common.resolve();
  const Skeleton skel = pipeline_skeleton(cfg);
  const PoseSequence gt = load_motion(gt_path);
  ensure_matches(skel, gt);

  const std::vector<std::string> files = collect_motion_files(aug_args);
  if (files.empty()) {
    throw std::invalid_argument("eval: no augmented motion files found");
  }
  std::vector<PoseSequence> augmented;
  for (const std::string& f : files) {
    augmented.push_back(load_motion(f));
    ensure_matches(skel, augmented.back());
  }
  const double load_ms = sw.lap();

  const FidelityReport rep = fidelity(skel, gt, augmented);
  const double fid_ms = sw.lap();

  save_report_json(rep, out);
  std::vector<std::string> outputs{fs::path(out).filename().string()};
  if (!csv.empty()) {
    save_report_csv(rep, csv);
    outputs.push_back(fs::path(csv).filename().string());
  }
  char line[256];
  std::snprintf(line, sizeof(line),
                "eval: %zu sample(s); e_pos %.3f cm, e_rot %.3f deg, d_pos %.3f "
                "cm, d_rot %.3f deg",
                augmented.size(), rep.e_pos, rep.e_rot, rep.d_pos, rep.d_rot);
  log_line(line);
  if (gt.poses.size() >= 4) {
    double jmean = 0.0;
    for (const PoseSequence& s : augmented) jmean += jitter(skel, s);
    std::snprintf(line, sizeof(line), "eval: jitter gt %.4f, augmented mean %.4f",
                  jitter(skel, gt), jmean / double(augmented.size()));
    log_line(line);
  }
  std::vector<std::string> inputs{gt_path};
  inputs.insert(inputs.end(), files.begin(), files.end());
  write_manifest(out + ".manifest.json", "eval", cfg, inputs, outputs,
                 {{"load", load_ms}, {"fidelity", fid_ms}, {"total", sw.total()}});
}

}  // namespace

// ---------------------------------------------------------------------------
// public pieces
// ---------------------------------------------------------------------------

PipelineConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ParseError("config: cannot open '" + path + "'");
  json doc;
  try {
    doc = json::parse(in);
  } catch (const nlohmann::json::exception& e) {
    throw ParseError("config '" + path + "': " + e.what());
  }
  PipelineConfig cfg;
  try {
    cfg = config_from_json(doc);
  } catch (const nlohmann::json::exception& e) {
    throw ParseError("config '" + path + "': " + e.what());
  }
  if (!cfg.skeleton_path.empty() && !fs::exists(cfg.skeleton_path)) {
    throw ParseError("config: skeleton file '" + cfg.skeleton_path +
                     "' does not exist");
  }
  return cfg;
}

std::string config_canonical(const PipelineConfig& cfg) {
  return config_to_json(cfg).dump();
}

std::string config_hash(const PipelineConfig& cfg) {
  char buf[17];
  std::snprintf(buf, sizeof(buf), "%016llx",
                static_cast<unsigned long long>(fnv1a(config_canonical(cfg))));
  return buf;
}

Skeleton pipeline_skeleton(const PipelineConfig& cfg) {
  if (cfg.skeleton_path.empty()) return Skeleton::default_humanoid();
  return load_skeleton(cfg.skeleton_path);
}

void write_manifest(const std::string& path, const std::string& command,
                    const PipelineConfig& cfg,
                    const std::vector<std::string>& inputs,
                    const std::vector<std::string>& outputs,
                    const std::vector<std::pair<std::string, double>>& timings) {
  ordered_json doc;
  doc["tool"] = "motiontk";
  doc["version"] = kToolVersion;
  doc["command"] = command;
  doc["seed"] = cfg.seed;
  doc["config_hash"] = config_hash(cfg);
  doc["inputs"] = inputs;
  doc["outputs"] = outputs;
  ordered_json tm;
  for (const auto& [name, ms] : timings) tm[name] = ms;
  doc["timings_ms"] = std::move(tm);
  std::ofstream out(path);
  if (!out) throw std::runtime_error("manifest: cannot write '" + path + "'");
  out << doc.dump(2) << "\n";
}

int run_cli(int argc, const char* const* argv) {
  CLI::App app{"motion augmentation toolkit: pose generation, physics-based "
               "optimization, virtual IMU synthesis and evaluation"};
  app.require_subcommand(1);

  // gen-synthetic
  Common gen_common;
  std::string gen_kind = "walk", gen_out;
  double gen_seconds = 2.0, gen_fps = 60.0;
  CLI::App* gen = app.add_subcommand("gen-synthetic", "write a synthetic reference motion");
  gen->add_option("--kind", gen_kind, "walk, wave, squat, mixed or stepping")
      ->capture_default_str();
  gen->add_option("--seconds", gen_seconds, "duration in seconds")->capture_default_str();
  gen->add_option("--fps", gen_fps, "frame rate")->capture_default_str();
  gen->add_option("-o,--out", gen_out, "output motion JSON")->required();
  add_common(gen, gen_common);
  gen->callback([&] { cmd_gen(gen_common, gen_kind, gen_seconds, gen_fps, gen_out); });

  // train-vae
  Common train_common;
  std::vector<std::string> train_data;
  std::string train_out, train_loss;
  CLI::App* train = app.add_subcommand("train-vae", "train the pose generator");
  train->add_option("--data", train_data, "training motion JSON file(s)")
      ->required()
      ->check(CLI::ExistingFile);
  train->add_option("-o,--out", train_out, "output model JSON")->required();
  train->add_option("--loss-csv", train_loss, "write the loss curve CSV here");
  add_common(train, train_common);
  train->callback([&] { cmd_train(train_common, train_data, train_out, train_loss); });

  // augment
  Common aug_common;
  std::string aug_model, aug_input, aug_out;
  int aug_n = 4, aug_jobs = 1;
  bool aug_phys = false;
  CLI::App* aug = app.add_subcommand("augment", "generate motion variants");
  aug->add_option("--model", aug_model, "trained model JSON")
      ->required()
      ->check(CLI::ExistingFile);
  aug->add_option("--input", aug_input, "reference motion JSON")
      ->required()
      ->check(CLI::ExistingFile);
  CLI::Option* aug_n_opt =
      aug->add_option("-n,--n", aug_n, "number of variants")->capture_default_str();
  aug->add_flag("--physopt", aug_phys, "run physical optimization on each variant");
  aug->add_option("--jobs", aug_jobs, "worker threads across variants")
      ->capture_default_str();
  aug->add_option("-o,--out", aug_out, "output directory")->required();
  add_common(aug, aug_common);
  aug->callback([&] {
    cmd_augment(aug_common, aug_model, aug_input, aug_n, aug_phys, aug_jobs,
                aug_out, aug_n_opt);
  });

  // optimize
  Common opt_common;
  std::string opt_input, opt_out, opt_forces, opt_torques;
  CLI::App* opt = app.add_subcommand("optimize", "physically optimize a motion");
  opt->add_option("--input", opt_input, "reference motion JSON")
      ->required()
      ->check(CLI::ExistingFile);
  opt->add_option("-o,--out", opt_out, "output motion JSON")->required();
  opt->add_option("--forces", opt_forces, "write reaction forces CSV here");
  opt->add_option("--torques", opt_torques, "write joint torques CSV here");
  add_common(opt, opt_common);
  opt->callback([&] {
    cmd_optimize(opt_common, opt_input, opt_out, opt_forces, opt_torques);
  });

  // synth-imu
  Common imu_common;
  std::string imu_input, imu_out;
  bool imu_grav = false;
  CLI::App* imu = app.add_subcommand("synth-imu", "synthesize virtual IMU signals");
  imu->add_option("--input", imu_input, "motion JSON")->required()->check(CLI::ExistingFile);
  imu->add_option("-o,--out", imu_out, "output IMU JSON")->required();
  CLI::Option* imu_grav_opt =
      imu->add_flag("--with-gravity", imu_grav, "add gravity to the accelerations");
  add_common(imu, imu_common);
  imu->callback([&] {
    cmd_synth_imu(imu_common, imu_input, imu_out, imu_grav, imu_grav_opt);
  });

  // eval
  Common eval_common;
  std::string eval_gt, eval_out, eval_csv;
  std::vector<std::string> eval_aug;
  CLI::App* ev = app.add_subcommand("eval", "fidelity and diversity report");
  ev->add_option("--gt", eval_gt, "ground-truth motion JSON")
      ->required()
      ->check(CLI::ExistingFile);
  ev->add_option("--aug", eval_aug, "augmented motion file(s) or directories")
      ->required();
  ev->add_option("-o,--out", eval_out, "output report JSON")->required();
  ev->add_option("--csv", eval_csv, "also write the per-joint CSV here");
  add_common(ev, eval_common);
  ev->callback([&] { cmd_eval(eval_common, eval_gt, eval_aug, eval_out, eval_csv); });

  try {
    app.parse(argc, argv);
    return 0;
  } catch (const CLI::CallForHelp&) {
    const auto subs = app.get_subcommands();
    std::cout << (subs.empty() ? app.help() : subs.front()->help());
    return 0;
  } catch (const CLI::ParseError& e) {
    std::cerr << e.what() << "\n";
    const auto subs = app.get_subcommands();
    std::cerr << (subs.empty() ? app.help() : subs.front()->help());
    return 1;
  } catch (const ParseError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  } catch (const std::invalid_argument& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "failure: " << e.what() << "\n";
    return 2;
  }
}

}  // namespace mtk
