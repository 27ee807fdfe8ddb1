// Copyright 2026 The gmmdae Authors.
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

#include "gmmdae/commands.hpp"

#include <cmath>
#include <functional>
#include <iomanip>
#include <sstream>

#include "gmmdae/binary_io.hpp"
#include "gmmdae/tensorio.hpp"

namespace gmmdae {

namespace fs = std::filesystem;

int exit_status_for(const Error& e) {
  switch (e.kind()) {
    case ErrorKind::kInvalidArgument:
    case ErrorKind::kConfig:
      return kExitConfig;
    case ErrorKind::kIo:
    case ErrorKind::kFormat:
      return kExitIo;
    case ErrorKind::kNumerical:
      return kExitNumerical;
    case ErrorKind::kIncompatible:
      return kExitIncompatible;
  }
  return kExitConfig;
}

namespace {

int guarded(const char* name, std::ostream& err, const std::function<void()>& body) {
  try {
    body();
    return kExitOk;
  } catch (const Error& e) {
    err << name << ": " << e.what() << '\n';
    return exit_status_for(e);
  } catch (const std::filesystem::filesystem_error& e) {
    err << name << ": " << e.what() << '\n';
    return kExitIo;
  }
}

// Creates the directory that will hold `file` when its own parent exists.
void ensure_parent(const fs::path& file) {
  const fs::path dir = file.parent_path();
  if (dir.empty() || fs::is_directory(dir)) return;
  std::error_code ec;
  fs::create_directory(dir, ec);
  if (ec) throw IoError("cannot create directory " + dir.string() + ": " + ec.message());
}

std::size_t patch_side(const PipelineConfig& cfg) {
  if (cfg.train.encoder_dims.size() < 2) {
    throw ConfigError("train.encoder_dims needs the input and bottleneck sizes");
  }
  const std::size_t input = cfg.train.encoder_dims.front();
  const auto side = static_cast<std::size_t>(std::llround(std::sqrt(static_cast<double>(input))));
  if (side * side != input) {
    throw ConfigError("train.encoder_dims input " + std::to_string(input) +
                      " is not a square patch size");
  }
  return side;
}

std::vector<PatchSequence> load_sequences(const fs::path& manifest, std::size_t side) {
  LoadOptions opts;
  opts.patch_size = side;
  return load_corpus(read_manifest(manifest), opts);
}

std::vector<Tensor> current_patches(const std::vector<PatchSequence>& corpus) {
  std::vector<Tensor> out;
  out.reserve(corpus.size());
  for (const auto& s : corpus) out.push_back(s.current());
  return out;
}

std::vector<Tensor> dynamic_images(const std::vector<PatchSequence>& corpus,
                                   const RankPoolConfig& cfg) {
  std::vector<Tensor> out;
  out.reserve(corpus.size());
  for (const auto& s : corpus) out.push_back(dynamic_image(s, cfg).image);
  return out;
}

SampleMatrix encode_all(const DaeModel& model, const std::vector<Tensor>& inputs) {
  SampleMatrix z(static_cast<Eigen::Index>(inputs.size()),
                 static_cast<Eigen::Index>(model.latent_dim()));
  for (std::size_t i = 0; i < inputs.size(); ++i) {
    const ForwardResult r = forward(model, prepare_input(model, inputs[i]));
    z.row(static_cast<Eigen::Index>(i)) = r.z.transpose();
  }
  return z;
}

std::string loss_log_text(const std::vector<double>& history) {
  std::string out;
  for (std::size_t e = 0; e < history.size(); ++e) {
    out += std::to_string(e + 1) + "," + format_double(history[e]) + "\n";
  }
  return out;
}

void require_file(const fs::path& p, const char* what) {
  if (p.empty()) throw ConfigError(std::string(what) + " path is not set");
  if (!fs::exists(p)) throw IoError(std::string(what) + " not found: " + p.string());
}

}  // namespace

// ---------------------------------------------------------------------------

int cmd_synth(const PipelineConfig& cfg, std::ostream& out, std::ostream& err) {
  return guarded("synth", err, [&] {
    const fs::path dir = cfg.resolve(cfg.synth.output_dir);
    if (dir.empty()) throw ConfigError("synth.output_dir is not set");
    const fs::path parent = dir.parent_path();
    if (!parent.empty() && !fs::is_directory(parent)) {
      throw IoError("parent of synth.output_dir does not exist: " + parent.string());
    }

    auto make_spec = [&](std::size_t frames, const std::string& anomalies,
                         const char* tag) {
      VideoSpec spec;
      spec.frames = frames;
      spec.patch_size = cfg.synth.patch_size;
      spec.t = cfg.rankpool.t;
      spec.speed_min = cfg.synth.speed_min;
      spec.speed_max = cfg.synth.speed_max;
      spec.fast_factor = cfg.synth.fast_factor;
      spec.blob_radius = cfg.synth.blob_radius;
      spec.noise_std = cfg.synth.noise_std;
      spec.segment_length = cfg.synth.segment_length;
      spec.anomalies = parse_anomalies(anomalies);
      spec.seed = derive_seed(cfg.seed, tag);
      spec.validate();
      return spec;
    };
    // Validate everything before touching the file system.
    const VideoSpec train = make_spec(cfg.synth.train_frames, "", "synth/train");
    const bool with_val = cfg.synth.val_frames > 0;
    const VideoSpec val = with_val ? make_spec(cfg.synth.val_frames,
                                               cfg.synth.val_anomalies, "synth/val")
                                   : VideoSpec{};
    const VideoSpec test = make_spec(cfg.synth.test_frames, cfg.synth.test_anomalies,
                                     "synth/test");

    std::error_code ec;
    fs::create_directory(dir, ec);
    if (ec) throw IoError("cannot create " + dir.string() + ": " + ec.message());

    auto report = [&](const char* name, const VideoCorpusFiles& files) {
      std::size_t positives = 0;
      for (const auto& [f, l] : files.frame_labels) positives += static_cast<std::size_t>(l);
      out << name << ": " << files.frame_labels.size() << " frames, " << positives
          << " abnormal -> " << files.manifest.string() << '\n';
    };
    report("train", make_video_corpus(train, dir, "train"));
    if (with_val) report("val", make_video_corpus(val, dir, "val"));
    report("test", make_video_corpus(test, dir, "test"));
  });
}

int cmd_train(const PipelineConfig& cfg, std::ostream& out, std::ostream& err) {
  return guarded("train", err, [&] {
    const std::size_t side = patch_side(cfg);
    const auto dims = mirror_dims(cfg.train.encoder_dims);
    cfg.train.params.validate();
    const fs::path manifest = cfg.resolve(cfg.train.manifest);
    require_file(manifest, "train.manifest");
    const auto corpus = load_sequences(manifest, side);
    if (corpus.empty()) throw ConfigError("training manifest has no entries");

    auto run = [&](const char* name, const std::vector<Tensor>& inputs,
                   InputAffine affine, const fs::path& model_path,
                   const fs::path& log_path) {
      TrainConfig params = cfg.train.params;
      params.seed = derive_seed(cfg.seed, std::string("train/") + name);
      out << name << ": training on " << inputs.size() << " inputs, "
          << params.max_epochs << " epochs\n";
      TrainResult r;
      try {
        r = train(inputs, params, dims, affine, [&](std::size_t epoch, double loss) {
          out << "  epoch " << epoch << " loss " << format_double(loss) << '\n';
        });
      } catch (const Error& e) {
        throw Error(e.kind(), std::string(name) + " model: " + e.what());
      }
      ensure_parent(model_path);
      ensure_parent(log_path);
      write_model(r.model, model_path);
      binary::write_text_file(log_path, loss_log_text(r.loss_history));
    };

    run("appearance", current_patches(corpus), InputAffine{},
        cfg.resolve(cfg.train.appearance_model),
        cfg.resolve(cfg.train.appearance_loss_log));
    const auto motion_inputs = dynamic_images(corpus, cfg.rankpool);
    run("motion", motion_inputs, InputAffine::from_corpus(motion_inputs),
        cfg.resolve(cfg.train.motion_model), cfg.resolve(cfg.train.motion_loss_log));
  });
}

int cmd_fit(const PipelineConfig& cfg, std::ostream& out, std::ostream& err) {
  return guarded("fit", err, [&] {
    cfg.fit.params.validate();
    const fs::path app_path = cfg.resolve(cfg.train.appearance_model);
    const fs::path mot_path = cfg.resolve(cfg.train.motion_model);
    const fs::path manifest = cfg.resolve(cfg.train.manifest);
    require_file(app_path, "train.appearance_model");
    require_file(mot_path, "train.motion_model");
    require_file(manifest, "train.manifest");
    const DaeModel appearance = read_model(app_path);
    const DaeModel motion = read_model(mot_path);
    const auto side = static_cast<std::size_t>(
        std::llround(std::sqrt(static_cast<double>(appearance.input_dim()))));
    const auto corpus = load_sequences(manifest, side);
    if (corpus.size() < cfg.fit.params.k) {
      throw ConfigError("fit.k=" + std::to_string(cfg.fit.params.k) + " exceeds the " +
                        std::to_string(corpus.size()) + " training sequences");
    }

    std::ostringstream log;
    log << "model,iteration,log_likelihood,delta\n";
    auto run = [&](const char* name, const DaeModel& dae,
                   const std::vector<Tensor>& inputs, const fs::path& gmm_path) {
      EmConfig params = cfg.fit.params;
      params.seed = derive_seed(cfg.seed, std::string("fit/") + name);
      const SampleMatrix z = encode_all(dae, inputs);
      FitResult r;
      try {
        r = fit(z, params);
      } catch (const Error& e) {
        throw Error(e.kind(), std::string(name) + " mixture: " + e.what());
      }
      for (const auto& it : r.log) {
        log << name << ',' << it.iteration << ',' << format_double(it.log_likelihood)
            << ',' << format_double(it.delta) << '\n';
      }
      out << name << ": k=" << r.model.k() << " d=" << r.model.d() << ", "
          << r.log.size() - 1 << " EM iterations, log-likelihood "
          << format_double(r.log.back().log_likelihood)
          << (r.converged ? " (converged)" : " (iteration limit)") << '\n';
      ensure_parent(gmm_path);
      write_gmm(r.model, gmm_path);
    };
    run("appearance", appearance, current_patches(corpus),
        cfg.resolve(cfg.fit.appearance_gmm));
    run("motion", motion, dynamic_images(corpus, cfg.rankpool),
        cfg.resolve(cfg.fit.motion_gmm));
    const fs::path log_path = cfg.resolve(cfg.fit.log);
    ensure_parent(log_path);
    binary::write_text_file(log_path, log.str());
  });
}

int cmd_score(const PipelineConfig& cfg, std::ostream& out, std::ostream& err) {
  return guarded("score", err, [&] {
    const FusionWeights weights(cfg.score.lambdas[0], cfg.score.lambdas[1],
                                cfg.score.lambdas[2], cfg.score.lambdas[3]);
    const fs::path paths[] = {cfg.resolve(cfg.train.appearance_model),
                              cfg.resolve(cfg.train.motion_model),
                              cfg.resolve(cfg.fit.appearance_gmm),
                              cfg.resolve(cfg.fit.motion_gmm)};
    for (const auto& p : paths) require_file(p, "model file");
    const fs::path manifest = cfg.resolve(cfg.score.manifest);
    require_file(manifest, "score.manifest");

    PipelineModels models{read_model(paths[0]), read_model(paths[1]),
                          read_gmm(paths[2]), read_gmm(paths[3])};
    const auto side = static_cast<std::size_t>(
        std::llround(std::sqrt(static_cast<double>(models.appearance.input_dim()))));
    models.check_compatible(side * side);
    const auto corpus = load_sequences(manifest, side);

    std::vector<long> frames;
    for (std::size_t f = 0; f < cfg.score.frame_count; ++f) {
      frames.push_back(static_cast<long>(f));
    }
    const CorpusScores scores = score_corpus(models, corpus, cfg.rankpool, weights, frames);
    const fs::path output = cfg.resolve(cfg.score.output);
    ensure_parent(output);
    write_score_file(scores.frames, output);
    if (!cfg.score.patch_output.empty()) {
      const fs::path patch_out = cfg.resolve(cfg.score.patch_output);
      ensure_parent(patch_out);
      write_patch_scores(scores.patches, patch_out);
    }
    out << "scored " << scores.patches.size() << " sequences over "
        << scores.frames.size() << " frames -> " << output.string() << '\n';
  });
}

int cmd_eval(const PipelineConfig& cfg, std::ostream& out, std::ostream& err) {
  return guarded("eval", err, [&] {
    const fs::path scores_path = cfg.resolve(cfg.eval.scores);
    const fs::path labels_path = cfg.resolve(cfg.eval.labels);
    require_file(scores_path, "eval.scores");
    require_file(labels_path, "eval.labels");
    const auto frames = read_score_file(scores_path);
    const auto labels = read_labels(labels_path);

    std::vector<std::pair<std::string, std::string>> report;
    const double a = frame_auroc(frames, labels);
    std::size_t positives = 0;
    for (const auto& [f, l] : labels) positives += static_cast<std::size_t>(l);
    report.emplace_back("frames", std::to_string(labels.size()));
    report.emplace_back("abnormal_frames", std::to_string(positives));
    report.emplace_back("auroc", format_double(a));

    std::ostringstream pct;
    pct << std::fixed << std::setprecision(2) << 100.0 * a;
    out << "frame-level AUROC: " << pct.str() << "%\n";

    if (cfg.eval.grid) {
      if (cfg.eval.validation_scores.empty() || cfg.eval.validation_labels.empty()) {
        throw ConfigError(
            "eval.grid needs eval.validation_scores and eval.validation_labels; "
            "tuning on the evaluation split is not supported");
      }
      const fs::path vs = cfg.resolve(cfg.eval.validation_scores);
      const fs::path vl = cfg.resolve(cfg.eval.validation_labels);
      require_file(vs, "eval.validation_scores");
      require_file(vl, "eval.validation_labels");

      auto to_records = [](const std::vector<FrameScore>& fs_list) {
        std::vector<ScoreRecord> records;
        for (const auto& f : fs_list) {
          if (f.top) records.push_back({f.frame_index, {}, *f.top, 0.0});
        }
        return records;
      };
      GridSpec grid = GridSpec::uniform(cfg.eval.grid_values);
      const GridResult best = grid_search(to_records(read_score_file(vs)),
                                          read_labels(vl), grid);

      auto test_records = to_records(frames);
      for (auto& r : test_records) r.anomaly = fuse(r.c, best.weights);
      std::vector<long> frame_ids;
      for (const auto& [f, l] : labels) frame_ids.push_back(f);
      const double test_auroc = frame_auroc(aggregate_frames(test_records, frame_ids), labels);

      for (std::size_t i = 0; i < 4; ++i) {
        report.emplace_back("grid_lambda" + std::to_string(i + 1),
                            format_double(best.weights[i]));
      }
      report.emplace_back("grid_points", std::to_string(best.evaluated));
      report.emplace_back("grid_validation_auroc", format_double(best.auroc));
      report.emplace_back("grid_test_auroc", format_double(test_auroc));

      std::ostringstream line;
      line << std::fixed << std::setprecision(2) << "grid search: lambda=("
           << best.weights[0] << ", " << best.weights[1] << ", " << best.weights[2]
           << ", " << best.weights[3] << "), validation AUROC " << 100.0 * best.auroc
           << "%, test AUROC " << 100.0 * test_auroc << "%\n";
      out << line.str();
    }

    if (!cfg.eval.report.empty()) {
      std::string text = "metric,value\n";
      for (const auto& [k, v] : report) text += k + "," + v + "\n";
      const fs::path report_path = cfg.resolve(cfg.eval.report);
      ensure_parent(report_path);
      binary::write_text_file(report_path, text);
    }
  });
}

int run_command(const std::string& name, const PipelineConfig& cfg,
                std::ostream& out, std::ostream& err) {
  if (name == "synth") return cmd_synth(cfg, out, err);
  if (name == "train") return cmd_train(cfg, out, err);
  if (name == "fit") return cmd_fit(cfg, out, err);
  if (name == "score") return cmd_score(cfg, out, err);
  if (name == "eval") return cmd_eval(cfg, out, err);
  err << "unknown command '" << name << "'\n";
  return kExitConfig;
}

}  // namespace gmmdae
