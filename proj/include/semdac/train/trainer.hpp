#pragma once

#include "semdac/audio/loudness.hpp"
#include "semdac/audio/wav.hpp"
#include "semdac/cli/config_file.hpp"
#include "semdac/codec/codec.hpp"
#include "semdac/loss/losses.hpp"
#include "semdac/loss/mel_loss.hpp"
#include "semdac/model/semdac_model.hpp"
#include "semdac/teacher/teacher.hpp"
#include "semdac/train/checkpoint.hpp"
#include "semdac/train/optimizer.hpp"

#include <cstdio>
#include <filesystem>
#include <functional>
#include <memory>
#include <string>
#include <vector>

#if defined(__GLIBC__)
#include <malloc.h>
#endif

namespace semdac {

struct CorpusItem {
  std::string id;
  AudioClip clip;
  uint64_t hash = 0;
  std::string semf_path;  // empty when absent
};

// Loads every .wav under `dir` (non-recursive, sorted by name), normalizes the
// full utterance to the target loudness, attaches <stem>.semf when present.
inline std::vector<CorpusItem> load_corpus(const std::string& dir, double target_lufs,
                                           int required_rate, bool need_teacher,
                                           std::vector<std::string>* warnings = nullptr) {
  namespace fs = std::filesystem;
  require(fs::is_directory(dir), Err::io, "corpus directory not found: " + dir);
  std::vector<fs::path> paths;
  for (const auto& e : fs::directory_iterator(dir))
    if (e.is_regular_file() && e.path().extension() == ".wav") paths.push_back(e.path());
  std::sort(paths.begin(), paths.end());
  require(!paths.empty(), Err::io, "no .wav files in corpus: " + dir);

  auto warn = [&](const std::string& msg) {
    if (warnings) warnings->push_back(msg);
  };
  std::vector<CorpusItem> out;
  for (const auto& p : paths) {
    CorpusItem item;
    item.id = p.stem().string();
    try {
      item.clip = load_wav(p.string());
    } catch (const Error& e) {
      warn("skipping unreadable clip " + item.id + ": " + e.what());
      continue;
    }
    if (item.clip.sample_rate != required_rate) {
      warn("skipping " + item.id + ": sample rate " + std::to_string(item.clip.sample_rate) +
           " != " + std::to_string(required_rate));
      continue;
    }
    try {
      item.clip = normalize_lufs(item.clip, target_lufs).clip;
    } catch (const Error&) {
      warn("skipping silent clip " + item.id);
      continue;
    }
    item.hash = fnv1a64(item.id);
    fs::path semf = p;
    semf.replace_extension(".semf");
    if (fs::exists(semf)) item.semf_path = semf.string();
    if (need_teacher && item.semf_path.empty()) {
      warn("skipping " + item.id + ": no teacher features (" + semf.string() + ")");
      continue;
    }
    out.push_back(std::move(item));
  }
  require(!out.empty(), Err::io,
          need_teacher ? "no usable clip has teacher features" : "no usable clips in corpus");
  return out;
}

struct StepRecord {
  LossBundle gen;
  double d_loss = 0.0;
};

class Trainer {
 public:
  Trainer(const RunConfig& cfg, bool mock_teacher)
      : cfg_(cfg), mock_(mock_teacher), scales_(MelScaleSet::standard(cfg.sample_rate)) {
    set_seed(cfg_.seed);
  }

  // Rebuilds parameters, optimizers and the data RNG from one master seed.
  void set_seed(uint64_t seed) {
    seed_ = seed;
    model_ = std::make_unique<SemdacModel<float>>();
    model_->init(cfg_.model_config(), seed);
    disc_ = std::make_unique<DiscModel<float>>();
    disc_->init(cfg_.model_config().disc, derive_seed(seed, "disc"));
    opt_g_ = AdamW<float>(cfg_.learning_rate, cfg_.beta1, cfg_.beta2, cfg_.weight_decay);
    opt_g_.attach(model_->params);
    opt_d_ = AdamW<float>(cfg_.learning_rate, cfg_.beta1, cfg_.beta2, cfg_.weight_decay);
    opt_d_.attach(disc_->params);
    rng_ = Rng(derive_seed(seed, "data"));
    iteration_ = 0;
  }

  void set_corpus(std::vector<CorpusItem> corpus) { corpus_ = std::move(corpus); }
  void load_corpus_dir(const std::string& dir, std::vector<std::string>* warnings = nullptr) {
    set_corpus(load_corpus(dir, cfg_.target_lufs, cfg_.sample_rate, !mock_, warnings));
  }

  const SemdacModel<float>& model() const { return *model_; }
  SemdacModel<float>& model() { return *model_; }
  const DiscModel<float>& disc() const { return *disc_; }
  uint64_t iteration() const { return iteration_; }
  const RunConfig& config() const { return cfg_; }

  // One iteration: discriminator update on the detached reconstruction, then
  // generator update against the refreshed discriminator.
  StepRecord train_step() {
    require(!corpus_.empty(), Err::value, "trainer has no corpus");
    const int batch = cfg_.batch_size;
    const ExcerptSpec spec = cfg_.excerpt();
    const int excerpt_len = spec.sample_count(cfg_.sample_rate);
    const int hop = model_->cfg.hop_total();
    const int frames = (excerpt_len + hop - 1) / hop;

    // all randomness drawn up front, in one fixed order
    struct Plan {
      int clip = 0;
      uint64_t excerpt_seed = 0;
    };
    std::vector<Plan> plan(batch);
    for (auto& p : plan) {
      p.clip = (int)rng_.below(corpus_.size());
      p.excerpt_seed = rng_.next_u64();
    }

    struct ClipWork {
      Graph<float> g;
      std::unique_ptr<BuildCtx<float>> ctx_gen, ctx_d;
      Var<float> fake, d_loss;
      Var<float> cb_loss, commit_loss, sem_q;
      std::shared_ptr<MelLossContext<float>> mel_ctx;
      Mat<float> real_wav;
      Mat<float> teacher;
      std::vector<Mat<float>> d_grads, g_grads;
      double d_loss_val = 0, mel = 0, fm = 0, adv = 0, cb = 0, commit = 0, sem = 0;
      std::string error;
    };
    std::vector<std::unique_ptr<ClipWork>> work(batch);
    for (auto& w : work) w = std::make_unique<ClipWork>();

    // pass A: generator forward + discriminator loss on detached fakes
#pragma omp parallel for schedule(dynamic, 1)
    for (int b = 0; b < batch; ++b) {
      ClipWork& w = *work[b];
      try {
        const CorpusItem& item = corpus_[plan[b].clip];
        Excerpt ex = random_excerpt(item.clip, spec, plan[b].excerpt_seed);
        AudioClip padded = pad_to_hop(ex.clip, hop).clip;
        w.teacher = fetch_teacher(item, ex.offset, frames);
        w.real_wav.resize(1, padded.length());
        for (int i = 0; i < padded.length(); ++i) w.real_wav(0, i) = padded.samples[i];
        w.mel_ctx = std::make_shared<MelLossContext<float>>(padded, scales_);

        w.ctx_gen = std::make_unique<BuildCtx<float>>(w.g, true);
        w.ctx_d = std::make_unique<BuildCtx<float>>(w.g, true);

        Var<float> z = model_->encode_var(*w.ctx_gen, w.real_wav);
        auto q = model_->rvq.build(*w.ctx_gen, z);
        w.cb_loss = q.codebook_loss;
        w.commit_loss = q.commitment_loss;
        w.sem_q = q.semantic_quantized;
        auto film_maps = model_->build_film(*w.ctx_gen, q.semantic_quantized);
        w.fake = model_->decoder.apply(*w.ctx_gen, q.semantic_quantized, q.acoustic_sum, film_maps);

        Var<float> real = constant(w.g, w.real_wav);
        Var<float> fake_detached = ops::stop_grad(w.fake);
        auto feats_real = disc_->mpd.build(*w.ctx_d, real);
        auto feats_fake = disc_->mpd.build(*w.ctx_d, fake_detached);
        w.d_loss = lsgan_d(feats_real, feats_fake);
        w.d_loss_val = w.d_loss.scalar();
        w.g.backward(w.d_loss.i);
        w.d_grads = w.ctx_d->collect_grads(disc_->params);
        w.g.clear_grads();
      } catch (const std::exception& e) {
        w.error = e.what();
      }
    }
    rethrow_clip_errors(work, "discriminator pass");

    reduce_and_step(opt_d_, disc_->params, work, [](ClipWork& w) { return &w.d_grads; },
                    batch);

    // pass B: generator losses against the updated discriminator
#pragma omp parallel for schedule(dynamic, 1)
    for (int b = 0; b < batch; ++b) {
      ClipWork& w = *work[b];
      try {
        BuildCtx<float> ctx_frozen(w.g, /*training=*/false);
        Var<float> real = constant(w.g, w.real_wav);
        auto feats_real = disc_->mpd.build(ctx_frozen, real);
        auto feats_fake = disc_->mpd.build(ctx_frozen, w.fake);

        Var<float> adv = lsgan_g(feats_fake);
        Var<float> fm = feature_match(feats_fake, feats_real);
        Var<float> mel = ops::multiscale_mel_loss_node(w.fake, w.mel_ctx);
        Var<float> projected = model_->projection.apply(*w.ctx_gen, w.sem_q);
        Var<float> sem = ops::mse_frames(projected, w.teacher);

        Var<float> total = ops::weighted_sum<float>(
            {mel, fm, adv, w.cb_loss, w.commit_loss, sem},
            {(float)weights_.mel, (float)weights_.feature_match, (float)weights_.adversarial,
             (float)weights_.codebook, (float)weights_.commitment, (float)weights_.semantic});
        w.mel = mel.scalar();
        w.fm = fm.scalar();
        w.adv = adv.scalar();
        w.cb = w.cb_loss.scalar();
        w.commit = w.commit_loss.scalar();
        w.sem = sem.scalar();
        w.g.backward(total.i);
        w.g_grads = w.ctx_gen->collect_grads(model_->params);
      } catch (const std::exception& e) {
        w.error = e.what();
      }
    }
    rethrow_clip_errors(work, "generator pass");

    reduce_and_step(opt_g_, model_->params, work, [](ClipWork& w) { return &w.g_grads; }, batch);

    ++iteration_;

    StepRecord rec;
    double mel = 0, fm = 0, adv = 0, cb = 0, commit = 0, sem = 0, dl = 0;
    for (auto& w : work) {
      mel += w->mel;
      fm += w->fm;
      adv += w->adv;
      cb += w->cb;
      commit += w->commit;
      sem += w->sem;
      dl += w->d_loss_val;
    }
    const double inv_b = 1.0 / batch;
    rec.d_loss = dl * inv_b;
    try {
      rec.gen = total_generator_loss(mel * inv_b, fm * inv_b, adv * inv_b, cb * inv_b,
                                     commit * inv_b, sem * inv_b, weights_);
      require(std::isfinite(rec.d_loss), Err::numeric, "non-finite loss term: d_loss");
    } catch (const Error& e) {
      fail(Err::numeric,
           std::string(e.what()) + " at iteration " + std::to_string(iteration_));
    }
    return rec;
  }

  // Full run: per-step CSV rows, checkpoints at step 10, every
  // checkpoint_every, and at the end.
  void train_loop(const std::string& out_dir,
                  const std::function<void(uint64_t, const StepRecord&)>& on_step = nullptr) {
#if defined(__GLIBC__)
    mallopt(M_MMAP_THRESHOLD, 1 << 26);  // keep large graph buffers on the heap
#endif
    namespace fs = std::filesystem;
    fs::create_directories(out_dir);
    const std::string csv_path = out_dir + "/loss_log.csv";
    const bool fresh = iteration_ == 0 || !fs::exists(csv_path);
    std::ofstream csv(csv_path, fresh ? std::ios::trunc : std::ios::app);
    require(csv.good(), Err::io, "cannot open loss log: " + csv_path);
    if (fresh) csv << "step,mel,fm,adv,cb,commit,sem,total,d_loss\n";

    if (iteration_ == 0) save_checkpoint_file(out_dir + "/ckpt_00000000.sdck");
    while (iteration_ < cfg_.iterations) {
      StepRecord rec = train_step();
      char line[512];
      std::snprintf(line, sizeof line,
                    "%llu,%.9g,%.9g,%.9g,%.9g,%.9g,%.9g,%.9g,%.9g\n",
                    (unsigned long long)iteration_, rec.gen.mel, rec.gen.feature_match,
                    rec.gen.adversarial, rec.gen.codebook, rec.gen.commitment, rec.gen.semantic,
                    rec.gen.total, rec.d_loss);
      csv << line;
      csv.flush();
      if (on_step) on_step(iteration_, rec);
      const bool cadence = cfg_.checkpoint_every > 0 && iteration_ % cfg_.checkpoint_every == 0;
      if (iteration_ == 10 || cadence || iteration_ == cfg_.iterations)
        save_checkpoint_file(checkpoint_name(out_dir, iteration_));
    }
    save_checkpoint_file(out_dir + "/ckpt_final.sdck");
  }

  static std::string checkpoint_name(const std::string& dir, uint64_t step) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "/ckpt_%08llu.sdck", (unsigned long long)step);
    return dir + buf;
  }

  void save_checkpoint_file(const std::string& path) const {
    CheckpointData ck;
    ck.config_text = serialize_run_config(cfg_);
    ck.iteration = iteration_;
    ck.gen_opt_step = opt_g_.steps_taken();
    ck.disc_opt_step = opt_d_.steps_taken();
    ck.rng_state = rng_.state();
    store_to_blobs(model_->params, "g.", ck.blobs);
    store_to_blobs(disc_->params, "d.", ck.blobs);
    adam_to_blobs(opt_g_, model_->params, "og.", ck.blobs);
    adam_to_blobs(opt_d_, disc_->params, "od.", ck.blobs);
    save_checkpoint(path, ck);
  }

  void restore(const CheckpointData& ck) {
    require(ck.config_text == serialize_run_config(cfg_), Err::config,
            "checkpoint config does not match the run config");
    blobs_to_store(ck, "g.", model_->params);
    blobs_to_store(ck, "d.", disc_->params);
    blobs_to_adam(ck, model_->params, "og.", opt_g_);
    blobs_to_adam(ck, disc_->params, "od.", opt_d_);
    opt_g_.set_step(ck.gen_opt_step);
    opt_d_.set_step(ck.disc_opt_step);
    rng_.set_state(ck.rng_state);
    iteration_ = ck.iteration;
  }

 private:
  Mat<float> fetch_teacher(const CorpusItem& item, int excerpt_offset, int frames) const {
    const int hop = model_->cfg.hop_total();
    const int start = (int)std::llround(double(excerpt_offset) / hop);
    if (mock_ || item.semf_path.empty()) {
      return mock_teacher_window(item.hash, start, frames, cfg_.teacher_dim).values;
    }
    const SemfInfo info = semf_info(item.semf_path);
    require(info.teacher_dim == cfg_.teacher_dim, Err::align,
            "teacher dim mismatch in " + item.semf_path);
    int s = std::min(start, std::max(0, info.n_frames - frames));
    s = std::max(0, s);
    const int n = std::min(frames, info.n_frames - s);
    require(n > 0, Err::align, "teacher file too short: " + item.semf_path);
    TeacherFeatures f = load_teacher_features(item.semf_path, s, n);
    return align_frames(f, frames).values;
  }

  // fixed-order reduction keeps training bit-deterministic across thread counts
  template <typename Work, typename GradsOf>
  void reduce_and_step(AdamW<float>& opt, ParamStore<float>& store,
                       std::vector<std::unique_ptr<Work>>& work, GradsOf grads_of, int batch) {
    std::vector<Mat<float>> total(store.items.size());
    const float inv_b = 1.0f / float(batch);
    for (auto& w : work) {
      auto* grads = grads_of(*w);
      for (size_t i = 0; i < total.size(); ++i) {
        if ((*grads)[i].size() == 0) continue;
        if (total[i].size() == 0)
          total[i] = (*grads)[i] * inv_b;
        else
          total[i] += (*grads)[i] * inv_b;
      }
      grads->clear();
      grads->resize(store.items.size());
    }
    opt.step(store, total);
  }

  template <typename Work>
  static void rethrow_clip_errors(const std::vector<std::unique_ptr<Work>>& work,
                                  const std::string& where) {
    for (const auto& w : work)
      if (!w->error.empty()) fail(Err::numeric, where + " failed: " + w->error);
  }

  // ---- graph-side GAN losses ----

  static Var<float> lsgan_d(const DiscFeatures<float>& real, const DiscFeatures<float>& fake) {
    std::vector<Var<float>> terms;
    std::vector<float> weights;
    for (size_t s = 0; s < real.subs.size(); ++s) {
      const auto& r = real.subs[s].logits;
      const auto& f = fake.subs[s].logits;
      for (const auto& v : r) {
        terms.push_back(ops::mean_all(ops::square(ops::add_scalar(v, -1.0f))));
        weights.push_back(1.0f / float(r.size()));
      }
      for (const auto& v : f) {
        terms.push_back(ops::mean_all(ops::square(v)));
        weights.push_back(1.0f / float(f.size()));
      }
    }
    return ops::weighted_sum(terms, weights);
  }

  static Var<float> lsgan_g(const DiscFeatures<float>& fake) {
    std::vector<Var<float>> terms;
    std::vector<float> weights;
    for (const auto& sub : fake.subs)
      for (const auto& v : sub.logits) {
        terms.push_back(ops::mean_all(ops::square(ops::add_scalar(v, -1.0f))));
        weights.push_back(1.0f / float(sub.logits.size()));
      }
    return ops::weighted_sum(terms, weights);
  }

  static Var<float> feature_match(const DiscFeatures<float>& fake,
                                  const DiscFeatures<float>& real) {
    std::vector<Var<float>> terms;
    std::vector<float> weights;
    for (size_t s = 0; s < fake.subs.size(); ++s)
      for (size_t l = 0; l < fake.subs[s].layers.size(); ++l) {
        const auto& fl = fake.subs[s].layers[l];
        const auto& rl = real.subs[s].layers[l];
        for (size_t p = 0; p < fl.size(); ++p) {
          terms.push_back(ops::l1_mean(fl[p], rl[p].val()));
          weights.push_back(1.0f / float(fl.size()));
        }
      }
    return ops::weighted_sum(terms, weights);
  }

  RunConfig cfg_;
  bool mock_ = true;
  MelScaleSet scales_;
  LossWeights weights_;
  std::unique_ptr<SemdacModel<float>> model_;
  std::unique_ptr<DiscModel<float>> disc_;
  AdamW<float> opt_g_, opt_d_;
  Rng rng_;
  uint64_t seed_ = 0;
  uint64_t iteration_ = 0;
  std::vector<CorpusItem> corpus_;
};

}  // namespace semdac
