// Copyright 2026 The faceir Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//    http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

// faceir command-line tool. Built on the C interface only.

#include <algorithm>
#include <atomic>
#include <cctype>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <memory>
#include <mutex>
#include <optional>
#include <sstream>
#include <stdexcept>
#include <string>
#include <thread>
#include <vector>

#include "CLI11.hpp"
#include "faceir/faceir.h"

namespace fs = std::filesystem;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitInput = 1;
constexpr int kExitNotConverged = 2;

// Raised on any failed library call; carries the library message.
class CliError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

void Check(fir_status status, const std::string& context) {
  if (status == FIR_OK) return;
  throw CliError(context + ": " + fir_last_error());
}

template <typename T, void (*Free)(T*)>
struct Deleter {
  void operator()(T* p) const { Free(p); }
};
using ImagePtr = std::unique_ptr<fir_image, Deleter<fir_image, fir_image_free>>;
using ShadingPtr = std::unique_ptr<fir_shading, Deleter<fir_shading, fir_shading_free>>;
using MaskPtr = std::unique_ptr<fir_mask, Deleter<fir_mask, fir_mask_free>>;
using NormalsPtr = std::unique_ptr<fir_normals, Deleter<fir_normals, fir_normals_free>>;
using ConfigPtr = std::unique_ptr<fir_config, Deleter<fir_config, fir_config_free>>;
using ResultPtr = std::unique_ptr<fir_result, Deleter<fir_result, fir_result_free>>;

ImagePtr ReadImage(const std::string& path, double gamma) {
  fir_image* out = nullptr;
  Check(fir_image_read_png(path.c_str(), gamma, &out), "reading " + path);
  return ImagePtr(out);
}

MaskPtr ReadMask(const std::string& path) {
  fir_mask* out = nullptr;
  Check(fir_mask_read_png(path.c_str(), &out), "reading " + path);
  return MaskPtr(out);
}

NormalsPtr ReadNormals(const std::string& path) {
  fir_normals* out = nullptr;
  Check(fir_normals_read_png(path.c_str(), &out), "reading " + path);
  return NormalsPtr(out);
}

ShadingPtr ReadShading(const std::string& path) {
  fir_shading* out = nullptr;
  Check(fir_shading_read_png(path.c_str(), &out), "reading " + path);
  return ShadingPtr(out);
}

fir_light ReadLight(const std::string& path) {
  fir_light light;
  Check(fir_light_read(path.c_str(), &light), "reading " + path);
  return light;
}

ResultPtr ReadResultDir(const std::string& dir) {
  fir_result* out = nullptr;
  Check(fir_result_read(dir.c_str(), &out), "reading result " + dir);
  return ResultPtr(out);
}

void WriteImage(const fir_image* image, const std::string& path, double gamma) {
  const fs::path parent = fs::path(path).parent_path();
  if (!parent.empty()) fs::create_directories(parent);
  Check(fir_image_write_png(image, path.c_str(), gamma), "writing " + path);
}

void Warn(const std::string& message) { std::cerr << "warning: " << message << "\n"; }

fir_member ParseMember(const std::string& name) {
  if (name == "i") return FIR_MEMBER_I;
  if (name == "j") return FIR_MEMBER_J;
  throw CliError("member must be i or j, got " + name);
}

// Flags shared by every subcommand that runs the solver.
struct SolverFlags {
  std::string preset = "default";
  std::string config_file;
  std::optional<double> lambda_a, lambda_s, lambda_n, lambda_l, lambda_irec, lambda_srec, xi;
  int phase1_iters = 300;
  int phase2_iters = 100;
  std::string detach = "dl";
  bool freeze_normals = false;
};

void AddSolverFlags(CLI::App* app, SolverFlags& f) {
  app->add_option("--preset", f.preset, "Weight preset")
      ->check(CLI::IsMember({"default", "dpr"}))
      ->envname("FACEIR_PRESET")
      ->capture_default_str();
  app->add_option("--config", f.config_file, "key=value weight file applied after the preset")
      ->envname("FACEIR_CONFIG");
  const std::pair<const char*, std::optional<double>*> weights[] = {
      {"a", &f.lambda_a},       {"s", &f.lambda_s},       {"n", &f.lambda_n},
      {"l", &f.lambda_l},       {"irec", &f.lambda_irec}, {"srec", &f.lambda_srec}};
  for (const auto& [key, slot] : weights) {
    std::string upper = key;
    for (char& c : upper) c = static_cast<char>(std::toupper(static_cast<unsigned char>(c)));
    app->add_option(std::string("--lambda-") + key, *slot, std::string("Override lambda_") + key)
        ->envname("FACEIR_LAMBDA_" + upper);
  }
  app->add_option("--xi", f.xi, "Smoothness floor")->envname("FACEIR_XI");
  app->add_option("--phase1-iters", f.phase1_iters, "Coarse phase iterations")
      ->check(CLI::PositiveNumber)
      ->envname("FACEIR_PHASE1_ITERS")
      ->capture_default_str();
  app->add_option("--phase2-iters", f.phase2_iters, "Refinement iterations")
      ->check(CLI::NonNegativeNumber)
      ->envname("FACEIR_PHASE2_ITERS")
      ->capture_default_str();
  app->add_option("--detach", f.detach, "Light target detaching")
      ->check(CLI::IsMember({"none", "dl", "dls"}))
      ->envname("FACEIR_DETACH")
      ->capture_default_str();
  app->add_flag("--freeze-normals", f.freeze_normals, "Keep normals fixed in the refinement");
}

ConfigPtr MakeConfig(const SolverFlags& f) {
  fir_config* raw = nullptr;
  Check(fir_config_create(&raw), "config");
  ConfigPtr cfg(raw);
  Check(fir_config_set_preset(cfg.get(), f.preset.c_str()), "preset");
  if (!f.config_file.empty()) {
    Check(fir_config_load(cfg.get(), f.config_file.c_str()), "config " + f.config_file);
  }
  const std::pair<const char*, const std::optional<double>*> weights[] = {
      {"lambda_a", &f.lambda_a},       {"lambda_s", &f.lambda_s},
      {"lambda_n", &f.lambda_n},       {"lambda_l", &f.lambda_l},
      {"lambda_irec", &f.lambda_irec}, {"lambda_srec", &f.lambda_srec},
      {"xi", &f.xi}};
  for (const auto& [key, value] : weights) {
    if (*value) Check(fir_config_set_weight(cfg.get(), key, **value), key);
  }
  Check(fir_config_set_iterations(cfg.get(), f.phase1_iters, f.phase2_iters), "iterations");
  fir_detach mode;
  Check(fir_config_parse_detach(f.detach.c_str(), &mode), "detach");
  Check(fir_config_set_detach(cfg.get(), mode), "detach");
  Check(fir_config_set_freeze_normals(cfg.get(), f.freeze_normals ? 1 : 0), "freeze");
  return cfg;
}

// One manifest line: path_i, path_j, mask, prior_i, prior_j.
struct PairJob {
  std::string image_i, image_j, mask, prior_i, prior_j;
  std::string out_dir;
  int line = 0;
};

std::vector<std::string> SplitTabs(const std::string& line) {
  std::vector<std::string> fields;
  std::size_t start = 0;
  while (true) {
    const std::size_t tab = line.find('\t', start);
    fields.push_back(line.substr(start, tab == std::string::npos ? std::string::npos : tab - start));
    if (tab == std::string::npos) break;
    start = tab + 1;
  }
  return fields;
}

std::vector<PairJob> ReadManifest(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw CliError("cannot read manifest " + path.string());
  const fs::path base = path.parent_path();
  auto resolve = [&](const std::string& p) -> std::string {
    if (p.empty()) return p;
    const fs::path q(p);
    return q.is_absolute() ? q.string() : (base / q).string();
  };
  std::vector<PairJob> jobs;
  std::string line;
  int number = 0;
  while (std::getline(in, line)) {
    ++number;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty() || line[0] == '#') continue;
    std::vector<std::string> f = SplitTabs(line);
    if (f.size() < 2 || f.size() > 5 || f[0].empty() || f[1].empty()) {
      throw CliError(path.string() + ":" + std::to_string(number) +
                     ": expected path_i, path_j[, mask, prior_i, prior_j]");
    }
    f.resize(5);
    jobs.push_back({resolve(f[0]), resolve(f[1]), resolve(f[2]), resolve(f[3]), resolve(f[4]),
                    "", number});
  }
  if (jobs.empty()) throw CliError("manifest " + path.string() + " lists no pairs");
  return jobs;
}

struct JobOutcome {
  bool ok = false;
  bool converged = false;
  std::string message;
};

struct ProgressSink {
  std::mutex* mutex;
  int line;
};

void PrintProgress(int iteration, int phase, double total, void* user) {
  const auto* sink = static_cast<const ProgressSink*>(user);
  std::lock_guard<std::mutex> lock(*sink->mutex);
  std::fprintf(stderr, "[pair %d] phase %d iter %d energy %.9e\n", sink->line, phase, iteration,
               total);
}

JobOutcome RunJob(const PairJob& job, const fir_config* cfg, double gamma, bool verbose,
                  std::mutex& log_mutex) {
  JobOutcome outcome;
  try {
    ImagePtr ii = ReadImage(job.image_i, gamma);
    ImagePtr ij = ReadImage(job.image_j, gamma);
    int w = 0, h = 0;
    Check(fir_image_size(ii.get(), &w, &h), "size");
    MaskPtr mask;
    if (job.mask.empty()) {
      Warn("no mask given; using the full image");
      fir_mask* m = nullptr;
      Check(fir_mask_create(w, h, 1, &m), "mask");
      mask.reset(m);
    } else {
      mask = ReadMask(job.mask);
    }
    auto prior = [&](const std::string& path) {
      if (!path.empty()) return ReadNormals(path);
      Warn("no prior normals given; using a frontal constant-normal prior");
      fir_normals* n = nullptr;
      Check(fir_normals_frontal(w, h, &n), "prior");
      return NormalsPtr(n);
    };
    NormalsPtr pi = prior(job.prior_i);
    NormalsPtr pj = job.prior_j.empty() && !job.prior_i.empty() ? nullptr : prior(job.prior_j);
    ProgressSink sink{&log_mutex, job.line};
    fir_result* raw = nullptr;
    Check(fir_decompose(ii.get(), ij.get(), mask.get(), pi.get(), pj ? pj.get() : nullptr, cfg,
                        verbose ? PrintProgress : nullptr, &sink, &raw),
          "decomposing pair " + std::to_string(job.line));
    ResultPtr result(raw);
    Check(fir_result_write(result.get(), job.out_dir.c_str()), "writing " + job.out_dir);
    outcome.ok = true;
    outcome.converged = fir_result_converged(result.get()) != 0;
    std::ostringstream msg;
    msg << job.out_dir << ": " << fir_result_stop_reason(result.get()) << ", energy "
        << fir_result_final_energy(result.get()) << ", " << fir_result_trace_size(result.get())
        << " iterations";
    outcome.message = msg.str();
  } catch (const std::exception& e) {
    outcome.message = e.what();
  }
  return outcome;
}

int Decompose(const std::vector<std::string>& inputs, const std::string& mask,
              const std::string& prior_i, const std::string& prior_j, const std::string& out,
              const SolverFlags& flags, double gamma, int threads, bool verbose) {
  std::vector<PairJob> jobs;
  if (inputs.size() == 1) {
    fs::path manifest(inputs[0]);
    if (fs::is_directory(manifest)) manifest /= "pair.tsv";
    jobs = ReadManifest(manifest);
  } else if (inputs.size() == 2) {
    jobs.push_back({inputs[0], inputs[1], mask, prior_i, prior_j, "", 1});
  } else {
    throw CliError("decompose takes a manifest, a pair directory or two image paths");
  }
  if (jobs.size() == 1) {
    jobs[0].out_dir = out;
  } else {
    for (std::size_t k = 0; k < jobs.size(); ++k) {
      char name[32];
      std::snprintf(name, sizeof(name), "pair_%04zu", k);
      jobs[k].out_dir = (fs::path(out) / name).string();
    }
  }
  ConfigPtr cfg = MakeConfig(flags);

  std::vector<JobOutcome> outcomes(jobs.size());
  std::atomic<std::size_t> next{0};
  std::mutex log_mutex;
  auto worker = [&] {
    for (std::size_t k = next++; k < jobs.size(); k = next++) {
      outcomes[k] = RunJob(jobs[k], cfg.get(), gamma, verbose, log_mutex);
    }
  };
  const int pool = std::max(1, std::min<int>(threads, static_cast<int>(jobs.size())));
  std::vector<std::thread> workers;
  for (int t = 1; t < pool; ++t) workers.emplace_back(worker);
  worker();
  for (std::thread& t : workers) t.join();

  int code = kExitOk;
  for (const JobOutcome& o : outcomes) {
    if (!o.ok) {
      std::cerr << "error: " << o.message << "\n";
      code = kExitInput;
    } else {
      std::cout << o.message << (o.converged ? "" : " (not converged)") << "\n";
      if (!o.converged && code == kExitOk) code = kExitNotConverged;
    }
  }
  return code;
}

ImagePtr Blend(const fir_image* fg, const std::string& background, const std::string& mask,
               double gamma, double tol) {
  ImagePtr bg = ReadImage(background, gamma);
  MaskPtr m = ReadMask(mask);
  fir_image* out = nullptr;
  int iterations = 0;
  double residual = 0.0;
  Check(fir_blend(fg, bg.get(), m.get(), tol, &out, &iterations, &residual), "blend");
  std::cerr << "blend: " << iterations << " iterations, residual " << residual << "\n";
  return ImagePtr(out);
}

int Relight(const std::string& albedo, const std::string& normals, const std::string& light,
            const std::string& background, const std::string& mask, const std::string& out,
            double gamma, double tol) {
  if (background.empty() != mask.empty()) {
    throw CliError("--background and --mask must be given together");
  }
  const fir_light l = ReadLight(light);
  ImagePtr a = ReadImage(albedo, gamma);
  NormalsPtr n = ReadNormals(normals);
  fir_image* raw = nullptr;
  Check(fir_render(a.get(), n.get(), &l, &raw), "relight");
  ImagePtr image(raw);
  if (!background.empty()) image = Blend(image.get(), background, mask, gamma, tol);
  WriteImage(image.get(), out, gamma);
  return kExitOk;
}

int Render(const std::string& albedo, const std::string& normals, const std::string& light,
           const std::string& out, const std::string& shading_out, double gamma) {
  const fir_light l = ReadLight(light);
  NormalsPtr n = ReadNormals(normals);
  if (!shading_out.empty()) {
    fir_shading* s = nullptr;
    Check(fir_render_shading(n.get(), &l, &s), "shading");
    ShadingPtr sp(s);
    Check(fir_shading_write_png(sp.get(), shading_out.c_str()), "writing " + shading_out);
  }
  if (!out.empty()) {
    if (albedo.empty()) throw CliError("--albedo is required to render an image");
    ImagePtr a = ReadImage(albedo, gamma);
    fir_image* raw = nullptr;
    Check(fir_render(a.get(), n.get(), &l, &raw), "render");
    ImagePtr image(raw);
    WriteImage(image.get(), out, gamma);
  }
  if (out.empty() && shading_out.empty()) throw CliError("nothing to write");
  return kExitOk;
}

int TransferLight(const std::string& source, const std::string& source_member,
                  const std::string& target, const std::string& target_member,
                  const std::string& out, double gamma) {
  ResultPtr src = ReadResultDir(source);
  ResultPtr dst = ReadResultDir(target);
  fir_image* raw = nullptr;
  Check(fir_transfer_light(src.get(), ParseMember(source_member), dst.get(),
                           ParseMember(target_member), &raw),
        "transfer-light");
  ImagePtr image(raw);
  WriteImage(image.get(), out, gamma);
  return kExitOk;
}

int Delight(const std::string& image, const std::string& shading, double epsilon,
            const std::string& out, const std::string& low_out, double gamma) {
  ImagePtr img = ReadImage(image, gamma);
  ShadingPtr s = ReadShading(shading);
  fir_image* raw = nullptr;
  fir_mask* low = nullptr;
  Check(fir_delight(img.get(), s.get(), epsilon, &raw, &low), "delight");
  ImagePtr albedo(raw);
  MaskPtr low_mask(low);
  WriteImage(albedo.get(), out, gamma);
  if (!low_out.empty()) {
    Check(fir_mask_write_png(low_mask.get(), low_out.c_str()), "writing " + low_out);
  }
  const std::size_t flagged = fir_mask_count(low_mask.get());
  if (flagged > 0) Warn(std::to_string(flagged) + " pixels below the shading floor");
  return kExitOk;
}

int BlendCommand(const std::string& fg, const std::string& bg, const std::string& mask,
                 const std::string& out, double gamma, double tol) {
  ImagePtr f = ReadImage(fg, gamma);
  ImagePtr image = Blend(f.get(), bg, mask, gamma, tol);
  WriteImage(image.get(), out, gamma);
  return kExitOk;
}

int Synth(const std::string& out, int size, std::uint64_t seed, double perturb, double sigma,
          double salt_pepper, const std::string& albedo) {
  fir_synth_options o;
  fir_synth_default_options(&o);
  o.size = size;
  o.seed = seed;
  o.prior_perturbation_deg = perturb;
  o.gaussian_sigma = sigma;
  o.salt_pepper_fraction = salt_pepper;
  o.albedo_kind = albedo == "checker" ? 0 : albedo == "radial" ? 1 : 2;
  Check(fir_synth_write(&o, out.c_str()), "synth");
  return kExitOk;
}

double LightRelativeError(const fir_light& a, const fir_light& b) {
  double num = 0.0, den = 0.0;
  for (int k = 0; k < FIR_SH_COUNT; ++k) {
    num += (a.coeffs[k] - b.coeffs[k]) * (a.coeffs[k] - b.coeffs[k]);
    den += b.coeffs[k] * b.coeffs[k];
  }
  return den > 0.0 ? std::sqrt(num / den) : std::sqrt(num);
}

int Eval(const std::string& result_dir, const std::string& truth_dir, const std::string& mask,
         const std::vector<double>& thresholds, const std::string& out) {
  ResultPtr pred = ReadResultDir(result_dir);
  ResultPtr truth = ReadResultDir(truth_dir);
  MaskPtr m;
  if (!mask.empty()) {
    m = ReadMask(mask);
  } else {
    const fs::path guess = fs::path(truth_dir).parent_path() / "mask.png";
    if (!fs::exists(guess)) throw CliError("no --mask given and " + guess.string() + " missing");
    m = ReadMask(guess.string());
  }

  std::ostringstream csv;
  csv.precision(10);
  csv << "metric,value\n";
  for (const auto& [member, tag] : {std::pair{FIR_MEMBER_I, "i"}, std::pair{FIR_MEMBER_J, "j"}}) {
    fir_normals *np = nullptr, *nt = nullptr;
    Check(fir_result_normals(pred.get(), member, &np), "normals");
    Check(fir_result_normals(truth.get(), member, &nt), "normals");
    NormalsPtr pn(np), tn(nt);
    double mean = 0.0, std_dev = 0.0;
    std::vector<double> pct(thresholds.size());
    Check(fir_angular_error(pn.get(), tn.get(), m.get(), thresholds.data(), thresholds.size(),
                            &mean, &std_dev, pct.data()),
          "angular error");
    csv << "normal_mean_deg_" << tag << "," << mean << "\n";
    csv << "normal_std_deg_" << tag << "," << std_dev << "\n";
    for (std::size_t k = 0; k < thresholds.size(); ++k) {
      csv << "normal_under_" << thresholds[k] << "deg_" << tag << "," << pct[k] << "\n";
    }
    fir_image *ap = nullptr, *at = nullptr;
    Check(fir_result_albedo(pred.get(), member, &ap), "albedo");
    Check(fir_result_albedo(truth.get(), member, &at), "albedo");
    ImagePtr pa(ap), ta(at);
    double mae = 0.0, rmse = 0.0;
    Check(fir_image_mae(pa.get(), ta.get(), m.get(), &mae), "albedo mae");
    Check(fir_image_rmse(pa.get(), ta.get(), m.get(), &rmse), "albedo rmse");
    csv << "albedo_mae_" << tag << "," << mae << "\n";
    csv << "albedo_rmse_" << tag << "," << rmse << "\n";
    fir_shading *sp = nullptr, *st = nullptr;
    Check(fir_result_shading(pred.get(), member, &sp), "shading");
    Check(fir_result_shading(truth.get(), member, &st), "shading");
    ShadingPtr ps(sp), ts(st);
    double smae = 0.0;
    Check(fir_shading_mae(ps.get(), ts.get(), m.get(), &smae), "shading mae");
    csv << "shading_mae_" << tag << "," << smae << "\n";
    fir_image *rp = nullptr, *rt = nullptr;
    Check(fir_result_reconstruction(pred.get(), member, &rp), "reconstruction");
    Check(fir_result_reconstruction(truth.get(), member, &rt), "reconstruction");
    ImagePtr pr(rp), tr(rt);
    double rmae = 0.0;
    Check(fir_image_mae(pr.get(), tr.get(), m.get(), &rmae), "reconstruction mae");
    csv << "reconstruction_mae_" << tag << "," << rmae << "\n";
    fir_light lp, lt;
    Check(fir_result_light(pred.get(), member, &lp), "light");
    Check(fir_result_light(truth.get(), member, &lt), "light");
    csv << "light_rel_error_" << tag << "," << LightRelativeError(lp, lt) << "\n";
  }
  if (out.empty()) {
    std::cout << csv.str();
  } else {
    std::ofstream file(out);
    if (!file) throw CliError("cannot write " + out);
    file << csv.str();
  }
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"faceir: paired face decomposition into albedo, shading, normals and light"};
  app.require_subcommand(1);
  app.fallthrough();
  app.set_version_flag("--version", std::string(fir_version()));

  double gamma = 1.0;
  std::uint64_t seed = 1;
  int threads = 1;
  bool verbose = false;
  app.add_option("--gamma", gamma, "Encoding gamma of PNG images (1 = linear)")
      ->check(CLI::PositiveNumber)
      ->envname("FACEIR_GAMMA")
      ->capture_default_str();
  app.add_option("--seed", seed, "Random seed")->envname("FACEIR_SEED")->capture_default_str();
  app.add_option("--threads", threads, "Worker threads for manifests")
      ->check(CLI::PositiveNumber)
      ->envname("FACEIR_THREADS")
      ->capture_default_str();
  app.add_flag("-v,--verbose", verbose, "Print solver progress");

  // decompose
  CLI::App* dec = app.add_subcommand("decompose", "Decompose image pairs");
  std::vector<std::string> dec_inputs;
  std::string dec_mask, dec_prior_i, dec_prior_j, dec_out;
  SolverFlags flags;
  dec->add_option("inputs", dec_inputs, "Manifest, pair directory, or image_i image_j")
      ->required()
      ->expected(1, 2);
  dec->add_option("--mask", dec_mask, "Mask PNG (two-image form)");
  dec->add_option("--prior-i", dec_prior_i, "Prior normal map of image i");
  dec->add_option("--prior-j", dec_prior_j, "Prior normal map of image j (defaults to prior i)");
  dec->add_option("-o,--out", dec_out, "Result directory")->required();
  AddSolverFlags(dec, flags);

  // relight
  CLI::App* rel = app.add_subcommand("relight", "Render albedo and normals under a new light");
  std::string rel_albedo, rel_normals, rel_light, rel_bg, rel_mask, rel_out;
  double blend_tol = 1e-6;
  rel->add_option("--albedo", rel_albedo, "Albedo PNG")->required();
  rel->add_option("--normals", rel_normals, "Encoded normal PNG")->required();
  rel->add_option("--light", rel_light, "Target SH file")->required();
  rel->add_option("--background", rel_bg, "Background PNG for Poisson blending");
  rel->add_option("--mask", rel_mask, "Blend region");
  rel->add_option("--tol", blend_tol, "Blend tolerance")->capture_default_str();
  rel->add_option("-o,--out", rel_out, "Output PNG")->required();

  // transfer-light
  CLI::App* tra = app.add_subcommand("transfer-light", "Relight a target with a source's light");
  std::string tra_src, tra_dst, tra_out, tra_sm = "i", tra_tm = "i";
  tra->add_option("--source", tra_src, "Source result directory")->required();
  tra->add_option("--source-member", tra_sm, "i or j")->capture_default_str();
  tra->add_option("--target", tra_dst, "Target result directory")->required();
  tra->add_option("--target-member", tra_tm, "i or j")->capture_default_str();
  tra->add_option("-o,--out", tra_out, "Output PNG")->required();

  // delight
  CLI::App* del = app.add_subcommand("delight", "Albedo = image / shading");
  std::string del_image, del_shading, del_out, del_low;
  double epsilon = 1e-3;
  del->add_option("--image", del_image, "Image PNG")->required();
  del->add_option("--shading", del_shading, "Shading PNG")->required();
  del->add_option("--epsilon", epsilon, "Shading floor")->capture_default_str();
  del->add_option("-o,--out", del_out, "Albedo PNG")->required();
  del->add_option("--low-confidence", del_low, "Mask PNG of pixels below the floor");

  // render
  CLI::App* ren = app.add_subcommand("render", "Render an image or shading from components");
  std::string ren_albedo, ren_normals, ren_light, ren_out, ren_shading;
  ren->add_option("--albedo", ren_albedo, "Albedo PNG");
  ren->add_option("--normals", ren_normals, "Encoded normal PNG")->required();
  ren->add_option("--light", ren_light, "SH file")->required();
  ren->add_option("-o,--out", ren_out, "Image PNG");
  ren->add_option("--shading-out", ren_shading, "Shading PNG");

  // synth
  CLI::App* syn = app.add_subcommand("synth", "Write a synthetic sphere pair");
  std::string syn_out, syn_albedo = "checker";
  int syn_size = 128;
  double syn_perturb = 0.0, syn_sigma = 0.0, syn_sp = 0.0;
  syn->add_option("-o,--out", syn_out, "Pair directory")->required();
  syn->add_option("--size", syn_size, "Image size")->check(CLI::Range(16, 4096))->capture_default_str();
  syn->add_option("--perturb-deg", syn_perturb, "Maximum prior rotation per pixel")
      ->check(CLI::Range(0.0, 90.0));
  syn->add_option("--noise-sigma", syn_sigma, "Gaussian noise level")->check(CLI::NonNegativeNumber);
  syn->add_option("--salt-pepper", syn_sp, "Fraction of corrupted pixels")->check(CLI::Range(0.0, 1.0));
  syn->add_option("--albedo", syn_albedo, "Albedo pattern")
      ->check(CLI::IsMember({"checker", "radial", "noise"}))
      ->capture_default_str();

  // blend
  CLI::App* ble = app.add_subcommand("blend", "Poisson-blend a foreground into a background");
  std::string ble_fg, ble_bg, ble_mask, ble_out;
  ble->add_option("--foreground", ble_fg, "Foreground PNG")->required();
  ble->add_option("--background", ble_bg, "Background PNG")->required();
  ble->add_option("--mask", ble_mask, "Blend region")->required();
  ble->add_option("--tol", blend_tol, "Residual tolerance")->capture_default_str();
  ble->add_option("-o,--out", ble_out, "Output PNG")->required();

  // eval
  CLI::App* ev = app.add_subcommand("eval", "Compare a result directory against ground truth");
  std::string ev_result, ev_truth, ev_mask, ev_out;
  std::vector<double> ev_thresholds{20.0, 25.0, 30.0};
  ev->add_option("--result", ev_result, "Result directory")->required();
  ev->add_option("--truth", ev_truth, "Ground-truth directory")->required();
  ev->add_option("--mask", ev_mask, "Evaluation mask (default: mask.png next to the truth)");
  ev->add_option("--thresholds", ev_thresholds, "Angular thresholds in degrees")
      ->delimiter(',')
      ->capture_default_str();
  ev->add_option("-o,--out", ev_out, "Metrics CSV (default: stdout)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kExitOk : kExitInput;
  }

  try {
    if (*dec) {
      return Decompose(dec_inputs, dec_mask, dec_prior_i, dec_prior_j, dec_out, flags, gamma,
                       threads, verbose);
    }
    if (*rel) return Relight(rel_albedo, rel_normals, rel_light, rel_bg, rel_mask, rel_out, gamma,
                             blend_tol);
    if (*tra) return TransferLight(tra_src, tra_sm, tra_dst, tra_tm, tra_out, gamma);
    if (*del) return Delight(del_image, del_shading, epsilon, del_out, del_low, gamma);
    if (*ren) return Render(ren_albedo, ren_normals, ren_light, ren_out, ren_shading, gamma);
    if (*syn) return Synth(syn_out, syn_size, seed, syn_perturb, syn_sigma, syn_sp, syn_albedo);
    if (*ble) return BlendCommand(ble_fg, ble_bg, ble_mask, ble_out, gamma, blend_tol);
    if (*ev) return Eval(ev_result, ev_truth, ev_mask, ev_thresholds, ev_out);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitInput;
  }
  return kExitInput;
}
