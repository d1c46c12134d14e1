// sdac: train / encode / decode / evaluate the SemDAC codec from the shell.
#include <CLI11.hpp>

#include "semdac/audio/synth.hpp"
#include "semdac/audio/wav.hpp"
#include "semdac/cli/config_file.hpp"
#include "semdac/codec/codec.hpp"
#include "semdac/eval/metrics.hpp"
#include "semdac/quant/presets.hpp"
#include "semdac/train/trainer.hpp"

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <string>
#include <vector>

namespace fs = std::filesystem;
using namespace semdac;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitUsage = 2;    // config / input errors
constexpr int kExitRuntime = 3;  // numeric / training failures

int exit_code_for(const Error& e) { return e.kind() == Err::numeric ? kExitRuntime : kExitUsage; }

struct LoadedModel {
  RunConfig cfg;
  SemdacModel<float> model;
};

LoadedModel load_model(const std::string& ckpt_path) {
  CheckpointData ck = load_checkpoint(ckpt_path);
  LoadedModel out;
  out.cfg = parse_run_config(ck.config_text);
  out.model.init(out.cfg.model_config(), out.cfg.seed);
  blobs_to_store(ck, "g.", out.model.params);
  return out;
}

std::vector<uint8_t> read_file(const std::string& path) {
  std::ifstream f(path, std::ios::binary);
  require(f.good(), Err::io, "cannot open: " + path);
  return std::vector<uint8_t>((std::istreambuf_iterator<char>(f)),
                              std::istreambuf_iterator<char>());
}

int cmd_train(const std::string& config_path, const std::string& corpus, const std::string& out,
              bool mock_teacher, const std::string& resume) {
  RunConfig cfg = load_run_config(config_path);
  cfg.model_config();  // validate before touching the corpus
  Trainer trainer(cfg, mock_teacher);
  std::vector<std::string> warnings;
  trainer.load_corpus_dir(corpus, &warnings);
  for (const auto& w : warnings) std::cerr << "warning: " << w << "\n";
  if (!resume.empty()) trainer.restore(load_checkpoint(resume));
  const uint64_t total = cfg.iterations;
  trainer.train_loop(out, [&](uint64_t step, const StepRecord& rec) {
    if (step % 50 == 0 || step == total)
      std::printf("step %llu/%llu  mel %.4f  total %.4f  d %.4f\n", (unsigned long long)step,
                  (unsigned long long)total, rec.gen.mel, rec.gen.total, rec.d_loss);
  });
  std::printf("done: %s/ckpt_final.sdck\n", out.c_str());
  return kExitOk;
}

int cmd_encode(const std::string& model_path, const std::string& in_wav,
               const std::string& out_sdac) {
  LoadedModel lm = load_model(model_path);
  AudioClip clip = load_wav(in_wav);
  std::vector<uint8_t> bytes = codec_encode(lm.model, clip);
  std::ofstream f(out_sdac, std::ios::binary);
  require(f.good(), Err::io, "cannot open for writing: " + out_sdac);
  f.write((const char*)bytes.data(), (std::streamsize)bytes.size());
  require(f.good(), Err::io, "write failed: " + out_sdac);

  auto [header, grid] = unpack(bytes);
  std::vector<int> sizes(header.codebook_sizes.begin(), header.codebook_sizes.end());
  std::printf("frames: %u  nominal: %.6g kbps  actual: %.6g kbps\n", header.n_frames,
              bitrate_kbps(sizes, lm.model.cfg.frame_rate()),
              header.n_frames > 0 ? file_bitrate_kbps(header) : 0.0);
  return kExitOk;
}

int cmd_decode(const std::string& model_path, const std::string& in_sdac,
               const std::string& out_wav) {
  LoadedModel lm = load_model(model_path);
  AudioClip wav = codec_decode(lm.model, read_file(in_sdac));
  save_wav(out_wav, wav);
  std::printf("decoded %d samples @ %d Hz -> %s\n", wav.length(), wav.sample_rate,
              out_wav.c_str());
  return kExitOk;
}

int cmd_eval(const std::string& model_path, const std::string& corpus, const std::string& out_csv) {
  LoadedModel lm = load_model(model_path);
  std::vector<std::string> warnings;
  auto items = load_corpus(corpus, lm.cfg.target_lufs, lm.cfg.sample_rate,
                           /*need_teacher=*/false, &warnings);
  for (const auto& w : warnings) std::cerr << "warning: " << w << "\n";
  std::vector<std::pair<std::string, AudioClip>> clips;
  for (auto& it : items) clips.emplace_back(it.id, it.clip);
  const double nominal =
      bitrate_kbps(lm.cfg.model_config().rvq.codebook_sizes(), lm.model.cfg.frame_rate());
  EvalSummary summary = eval_corpus(
      clips, [&](const AudioClip& c) { return codec_roundtrip(lm.model, c); }, nominal);
  std::ofstream f(out_csv);
  require(f.good(), Err::io, "cannot open for writing: " + out_csv);
  f << eval_csv(summary);
  for (const auto& s : summary.skipped) std::cerr << "warning: skipped " << s << "\n";
  std::printf("clips: %zu  mean si-snr: %.3f dB  median: %.3f dB  mean mel: %.4f\n",
              summary.reports.size(), summary.mean_si_snr, summary.median_si_snr,
              summary.mean_mel);
  return kExitOk;
}

int cmd_bitrate_table() {
  std::printf("%-14s %-28s %s\n", "preset", "codebook sizes", "kbps");
  for (const auto& p : shipped_presets()) {
    std::string sizes;
    for (size_t i = 0; i < p.sizes.size(); ++i)
      sizes += (i ? "+" : "") + std::to_string(p.sizes[i]);
    std::printf("%-14s %-28s %.6g\n", p.name.c_str(), sizes.c_str(),
                bitrate_kbps(p.sizes, 50.0));
  }
  return kExitOk;
}

int cmd_ablate(const std::string& grid, const std::string& base_path, const std::string& out) {
  RunConfig base = load_run_config(base_path);
  fs::create_directories(out);
  struct Cell {
    std::string id;
    RunConfig cfg;
  };
  std::vector<Cell> cells;
  if (grid == "film") {
    for (const std::string& f :
         {"none", "F0", "F1", "F2", "F3", "F0+F1", "F0+F2", "F0+F3"}) {
      RunConfig c = base;
      c.film = f;
      cells.push_back({"film-" + f, c});
    }
  } else if (grid == "semsize") {
    for (int s : {128, 256, 512, 1024}) {
      RunConfig c = base;
      c.semantic_size = s;
      cells.push_back({"sem-" + std::to_string(s), c});
    }
  } else {
    fail(Err::config, "unknown ablation grid: " + grid + " (want film or semsize)");
  }

  std::ofstream manifest(out + "/manifest.csv");
  require(manifest.good(), Err::io, "cannot open manifest for writing");
  manifest << "config_id,path,film,semantic_size,nominal_kbps\n";
  for (const auto& cell : cells) {
    cell.cfg.model_config();  // each cell must construct a valid model config
    const std::string path = out + "/" + cell.id + ".cfg";
    std::ofstream f(path);
    require(f.good(), Err::io, "cannot open for writing: " + path);
    f << serialize_run_config(cell.cfg);
    const double kbps =
        bitrate_kbps(cell.cfg.model_config().rvq.codebook_sizes(), 50.0);
    manifest << cell.id << "," << path << "," << (cell.cfg.film.empty() ? "none" : cell.cfg.film)
             << "," << cell.cfg.semantic_size << "," << kbps << "\n";
  }
  std::printf("wrote %zu configs + manifest to %s\n", cells.size(), out.c_str());
  return kExitOk;
}

int cmd_gen_corpus(const std::string& out, int count, uint64_t seed, double seconds) {
  fs::create_directories(out);
  for (int i = 0; i < count; ++i) {
    AudioClip clip = synth_voice_clip(derive_seed(seed, "clip" + std::to_string(i)), seconds,
                                      16000);
    char name[64];
    std::snprintf(name, sizeof name, "/clip_%03d.wav", i);
    save_wav(out + name, clip);
  }
  std::printf("wrote %d clips to %s\n", count, out.c_str());
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"SemDAC neural speech codec"};
  app.require_subcommand(1);

  std::string config_path, corpus, out, model_path, in_path, out_path, resume, grid;
  bool mock_teacher = false;
  int count = 16;
  uint64_t seed = 7;
  double seconds = 0.38;

  auto* train = app.add_subcommand("train", "train a model");
  train->add_option("--config", config_path, "run config file")->required();
  train->add_option("--corpus", corpus, "directory of 16 kHz wav files")->required();
  train->add_option("--out", out, "output directory")->required();
  train->add_flag("--mock-teacher", mock_teacher, "use the deterministic mock teacher");
  train->add_option("--resume", resume, "checkpoint to resume from");

  auto* encode = app.add_subcommand("encode", "wav -> .sdac");
  encode->add_option("--model", model_path, "checkpoint")->required();
  encode->add_option("input", in_path, "input wav")->required();
  encode->add_option("output", out_path, "output .sdac")->required();

  auto* decode = app.add_subcommand("decode", ".sdac -> wav");
  decode->add_option("--model", model_path, "checkpoint")->required();
  decode->add_option("input", in_path, "input .sdac")->required();
  decode->add_option("output", out_path, "output wav")->required();

  auto* eval = app.add_subcommand("eval", "codec metrics over a corpus");
  eval->add_option("--model", model_path, "checkpoint")->required();
  eval->add_option("--corpus", corpus, "directory of wav files")->required();
  eval->add_option("--out", out_path, "output csv")->required();

  app.add_subcommand("bitrate-table", "print nominal bitrates of the shipped presets");

  auto* ablate = app.add_subcommand("ablate", "emit an ablation config grid");
  ablate->add_option("--grid", grid, "film | semsize")->required();
  ablate->add_option("--config", config_path, "base run config")->required();
  ablate->add_option("--out", out, "output directory")->required();

  auto* gen = app.add_subcommand("gen-corpus", "write a deterministic synthetic test corpus");
  gen->add_option("--out", out, "output directory")->required();
  gen->add_option("--count", count, "number of clips");
  gen->add_option("--seed", seed, "corpus seed");
  gen->add_option("--seconds", seconds, "clip length in seconds");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);  // --help exits 0
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kExitUsage;
  }

  try {
    if (app.got_subcommand("train"))
      return cmd_train(config_path, corpus, out, mock_teacher, resume);
    if (app.got_subcommand("encode")) return cmd_encode(model_path, in_path, out_path);
    if (app.got_subcommand("decode")) return cmd_decode(model_path, in_path, out_path);
    if (app.got_subcommand("eval")) return cmd_eval(model_path, corpus, out_path);
    if (app.got_subcommand("bitrate-table")) return cmd_bitrate_table();
    if (app.got_subcommand("ablate")) return cmd_ablate(grid, config_path, out);
    if (app.got_subcommand("gen-corpus")) return cmd_gen_corpus(out, count, seed, seconds);
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return exit_code_for(e);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitRuntime;
  }
  return kExitUsage;
}
