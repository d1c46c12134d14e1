#pragma once

#include "semdac/audio/clip.hpp"
#include "semdac/core/common.hpp"
#include "semdac/loss/losses.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <string>
#include <vector>

namespace semdac {

// Scale-invariant SNR in dB: project the estimate onto the (zero-meaned)
// reference, compare target energy to residual energy. Capped to [-60, +60]
// so reports stay finite.
inline double si_snr(const AudioClip& ref, const AudioClip& est) {
  require(ref.length() == est.length(), Err::value, "si_snr needs equal lengths");
  require(ref.length() > 0, Err::value, "si_snr needs non-empty clips");
  const int n = ref.length();
  double mean_r = 0.0, mean_e = 0.0;
  for (int i = 0; i < n; ++i) {
    mean_r += ref.samples[i];
    mean_e += est.samples[i];
  }
  mean_r /= n;
  mean_e /= n;
  double dot = 0.0, rr = 0.0;
  for (int i = 0; i < n; ++i) {
    const double r = ref.samples[i] - mean_r;
    const double e = est.samples[i] - mean_e;
    dot += e * r;
    rr += r * r;
  }
  require(rr > 0.0, Err::value, "si_snr reference is all zeros");
  const double a = dot / rr;
  double st = 0.0, err = 0.0;
  for (int i = 0; i < n; ++i) {
    const double r = ref.samples[i] - mean_r;
    const double e = est.samples[i] - mean_e;
    const double t = a * r;
    st += t * t;
    err += (e - t) * (e - t);
  }
  const double eps = 1e-8;
  const double snr = 10.0 * std::log10((st + eps) / (err + eps));
  return std::clamp(snr, -60.0, 60.0);
}

// multi-scale mel loss reported as a metric
inline double mel_distance(const AudioClip& ref, const AudioClip& est) {
  return multiscale_mel_loss<double>(ref, est, MelScaleSet::standard(ref.sample_rate));
}

struct EvalReport {
  std::string clip_id;
  double si_snr_db = 0.0;
  double mel_distance = 0.0;
  double nominal_bitrate_kbps = 0.0;
};

struct EvalSummary {
  std::vector<EvalReport> reports;
  std::vector<std::string> skipped;  // unreadable clips, recorded not fatal
  double mean_si_snr = 0.0, median_si_snr = 0.0;
  double mean_mel = 0.0, median_mel = 0.0;
};

// Runs a codec round trip over named clips and aggregates the two metrics.
// The codec is injected so tests can evaluate a passthrough.
inline EvalSummary eval_corpus(const std::vector<std::pair<std::string, AudioClip>>& clips,
                               const std::function<AudioClip(const AudioClip&)>& codec,
                               double nominal_bitrate_kbps) {
  require(!clips.empty(), Err::value, "evaluation corpus is empty");
  EvalSummary out;
  for (const auto& [id, clip] : clips) {
    try {
      AudioClip rec = codec(clip);
      EvalReport r;
      r.clip_id = id;
      r.si_snr_db = si_snr(clip, rec);
      r.mel_distance = mel_distance(clip, rec);
      r.nominal_bitrate_kbps = nominal_bitrate_kbps;
      out.reports.push_back(std::move(r));
    } catch (const Error& e) {
      out.skipped.push_back(id + ": " + e.what());
    }
  }
  require(!out.reports.empty(), Err::value, "no clip survived evaluation");
  auto agg = [&](auto get, double& mean, double& median) {
    std::vector<double> v;
    for (const auto& r : out.reports) v.push_back(get(r));
    mean = 0.0;
    for (double x : v) mean += x;
    mean /= v.size();
    std::sort(v.begin(), v.end());
    median = v.size() % 2 ? v[v.size() / 2] : 0.5 * (v[v.size() / 2 - 1] + v[v.size() / 2]);
  };
  agg([](const EvalReport& r) { return r.si_snr_db; }, out.mean_si_snr, out.median_si_snr);
  agg([](const EvalReport& r) { return r.mel_distance; }, out.mean_mel, out.median_mel);
  return out;
}

inline std::string eval_csv(const EvalSummary& s) {
  std::string csv = "clip_id,bitrate_kbps,si_snr_db,mel_distance\n";
  char line[256];
  for (const auto& r : s.reports) {
    std::snprintf(line, sizeof line, "%s,%.6g,%.6g,%.6g\n", r.clip_id.c_str(),
                  r.nominal_bitrate_kbps, r.si_snr_db, r.mel_distance);
    csv += line;
  }
  return csv;
}

}  // namespace semdac
