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

#include "faceir/faceir.h"

#include <algorithm>
#include <exception>
#include <memory>
#include <new>
#include <string>
#include <utility>
#include <vector>

#include "faceir/compositor.hpp"
#include "faceir/decomposer.hpp"
#include "faceir/error.hpp"
#include "faceir/io.hpp"
#include "faceir/lambertian.hpp"
#include "faceir/metrics.hpp"
#include "faceir/sh_lighting.hpp"
#include "faceir/synth.hpp"

struct fir_image {
  faceir::Image image;
};
struct fir_shading {
  faceir::ShadingMap shading;
};
struct fir_mask {
  faceir::Mask mask;
};
struct fir_normals {
  faceir::NormalMap normals;
};
struct fir_config {
  faceir::SolverConfig config;
  std::string preset = "default";
};
struct fir_result {
  faceir::DecompositionResult result;
};

namespace {

thread_local std::string g_last_error;

fir_status ToStatus(faceir::ErrorCode code) {
  switch (code) {
    case faceir::ErrorCode::kInvalidArgument: return FIR_ERR_INVALID_ARGUMENT;
    case faceir::ErrorCode::kInsufficientData: return FIR_ERR_INSUFFICIENT_DATA;
    case faceir::ErrorCode::kDiverged: return FIR_ERR_DIVERGED;
    case faceir::ErrorCode::kNotConverged: return FIR_ERR_NOT_CONVERGED;
    case faceir::ErrorCode::kIo: return FIR_ERR_IO;
    case faceir::ErrorCode::kInternal: return FIR_ERR_INTERNAL;
  }
  return FIR_ERR_INTERNAL;
}

fir_status Fail(fir_status status, std::string message) {
  g_last_error = std::move(message);
  return status;
}

template <typename F>
fir_status Guard(F&& body) {
  try {
    body();
    return FIR_OK;
  } catch (const faceir::Error& e) {
    return Fail(ToStatus(e.code()), e.what());
  } catch (const std::bad_alloc&) {
    return Fail(FIR_ERR_INTERNAL, "out of memory");
  } catch (const std::exception& e) {
    return Fail(FIR_ERR_INTERNAL, e.what());
  } catch (...) {
    return Fail(FIR_ERR_INTERNAL, "unknown error");
  }
}

#define FIR_REQUIRE(cond, what)                                  \
  do {                                                           \
    if (!(cond)) return Fail(FIR_ERR_INVALID_ARGUMENT, (what));  \
  } while (0)

faceir::Member ToMember(fir_member m) {
  return m == FIR_MEMBER_J ? faceir::Member::kJ : faceir::Member::kI;
}

faceir::ShCoefficients ToSh(const fir_light& light) {
  faceir::ShCoefficients sh;
  std::copy(light.coeffs, light.coeffs + FIR_SH_COUNT, sh.l.begin());
  return sh;
}

void FromSh(const faceir::ShCoefficients& sh, fir_light* out) {
  std::copy(sh.l.begin(), sh.l.end(), out->coeffs);
}

template <typename G>
void Size(const G& g, int* width, int* height) {
  if (width) *width = g.width();
  if (height) *height = g.height();
}

bool ValidMember(fir_member m) { return m == FIR_MEMBER_I || m == FIR_MEMBER_J; }

}  // namespace

extern "C" {

const char* fir_version(void) { return "0.1.0"; }

const char* fir_status_name(fir_status status) {
  switch (status) {
    case FIR_OK: return "ok";
    case FIR_ERR_INVALID_ARGUMENT: return "invalid argument";
    case FIR_ERR_INSUFFICIENT_DATA: return "insufficient data";
    case FIR_ERR_DIVERGED: return "diverged";
    case FIR_ERR_NOT_CONVERGED: return "not converged";
    case FIR_ERR_IO: return "i/o error";
    case FIR_ERR_INTERNAL: return "internal error";
  }
  return "unknown status";
}

const char* fir_last_error(void) { return g_last_error.c_str(); }

// Images.

fir_status fir_image_create(int width, int height, fir_image** out) {
  FIR_REQUIRE(out, "null output");
  FIR_REQUIRE(width > 0 && height > 0, "image dimensions must be positive");
  return Guard([&] { *out = new fir_image{faceir::Image(width, height)}; });
}

fir_status fir_image_read_png(const char* path, double gamma, fir_image** out) {
  FIR_REQUIRE(path && out, "null argument");
  return Guard([&] { *out = new fir_image{faceir::ReadImagePng(path, gamma)}; });
}

fir_status fir_image_write_png(const fir_image* image, const char* path, double gamma) {
  FIR_REQUIRE(image && path, "null argument");
  return Guard([&] { faceir::WriteImagePng(path, image->image, gamma); });
}

fir_status fir_image_size(const fir_image* image, int* width, int* height) {
  FIR_REQUIRE(image, "null image");
  Size(image->image, width, height);
  return FIR_OK;
}

double* fir_image_data(fir_image* image) {
  return image ? image->image.values().data() : nullptr;
}

const double* fir_image_const_data(const fir_image* image) {
  return image ? image->image.values().data() : nullptr;
}

void fir_image_free(fir_image* image) { delete image; }

// Shading.

fir_status fir_shading_read_png(const char* path, fir_shading** out) {
  FIR_REQUIRE(path && out, "null argument");
  return Guard([&] { *out = new fir_shading{faceir::ReadGrayPng(path)}; });
}

fir_status fir_shading_write_png(const fir_shading* shading, const char* path) {
  FIR_REQUIRE(shading && path, "null argument");
  return Guard([&] { faceir::WriteGrayPng(path, shading->shading); });
}

fir_status fir_shading_size(const fir_shading* shading, int* width, int* height) {
  FIR_REQUIRE(shading, "null shading");
  Size(shading->shading, width, height);
  return FIR_OK;
}

const double* fir_shading_const_data(const fir_shading* shading) {
  return shading ? shading->shading.values().data() : nullptr;
}

void fir_shading_free(fir_shading* shading) { delete shading; }

// Masks.

fir_status fir_mask_create(int width, int height, int inside, fir_mask** out) {
  FIR_REQUIRE(out, "null output");
  FIR_REQUIRE(width > 0 && height > 0, "mask dimensions must be positive");
  return Guard([&] { *out = new fir_mask{faceir::Mask(width, height, inside != 0)}; });
}

fir_status fir_mask_read_png(const char* path, fir_mask** out) {
  FIR_REQUIRE(path && out, "null argument");
  return Guard([&] { *out = new fir_mask{faceir::ReadMaskPng(path)}; });
}

fir_status fir_mask_write_png(const fir_mask* mask, const char* path) {
  FIR_REQUIRE(mask && path, "null argument");
  return Guard([&] { faceir::WriteMaskPng(path, mask->mask); });
}

fir_status fir_mask_size(const fir_mask* mask, int* width, int* height) {
  FIR_REQUIRE(mask, "null mask");
  Size(mask->mask, width, height);
  return FIR_OK;
}

fir_status fir_mask_set(fir_mask* mask, int x, int y, int inside) {
  FIR_REQUIRE(mask, "null mask");
  FIR_REQUIRE(x >= 0 && y >= 0 && x < mask->mask.width() && y < mask->mask.height(),
              "pixel out of range");
  mask->mask.set(x, y, inside != 0);
  return FIR_OK;
}

int fir_mask_get(const fir_mask* mask, int x, int y) {
  if (!mask || x < 0 || y < 0 || x >= mask->mask.width() || y >= mask->mask.height()) return 0;
  return mask->mask(x, y) ? 1 : 0;
}

size_t fir_mask_count(const fir_mask* mask) { return mask ? mask->mask.count() : 0; }

void fir_mask_free(fir_mask* mask) { delete mask; }

// Normals.

fir_status fir_normals_frontal(int width, int height, fir_normals** out) {
  FIR_REQUIRE(out, "null output");
  FIR_REQUIRE(width > 0 && height > 0, "normal map dimensions must be positive");
  return Guard([&] { *out = new fir_normals{faceir::NormalMap(width, height)}; });
}

fir_status fir_normals_read_png(const char* path, fir_normals** out) {
  FIR_REQUIRE(path && out, "null argument");
  return Guard([&] { *out = new fir_normals{faceir::ReadNormalPng(path)}; });
}

fir_status fir_normals_write_png(const fir_normals* normals, const char* path) {
  FIR_REQUIRE(normals && path, "null argument");
  return Guard([&] { faceir::WriteNormalPng(path, normals->normals); });
}

fir_status fir_normals_size(const fir_normals* normals, int* width, int* height) {
  FIR_REQUIRE(normals, "null normals");
  Size(normals->normals, width, height);
  return FIR_OK;
}

fir_status fir_normals_get(const fir_normals* normals, int x, int y, double* xyz, int* valid) {
  FIR_REQUIRE(normals && xyz, "null argument");
  const faceir::NormalMap& n = normals->normals;
  FIR_REQUIRE(x >= 0 && y >= 0 && x < n.width() && y < n.height(), "pixel out of range");
  const faceir::Vec3& v = n(x, y);
  xyz[0] = v.x();
  xyz[1] = v.y();
  xyz[2] = v.z();
  if (valid) *valid = n.valid(static_cast<std::size_t>(y) * n.width() + x) ? 1 : 0;
  return FIR_OK;
}

void fir_normals_free(fir_normals* normals) { delete normals; }

// Lights.

fir_status fir_light_read(const char* path, fir_light* out) {
  FIR_REQUIRE(path && out, "null argument");
  return Guard([&] { FromSh(faceir::ReadShFile(path), out); });
}

fir_status fir_light_write(const fir_light* light, const char* path) {
  FIR_REQUIRE(light && path, "null argument");
  return Guard([&] { faceir::WriteShFile(path, ToSh(*light)); });
}

void fir_light_ambient(double shading, fir_light* out) {
  if (out) FromSh(faceir::ShCoefficients::Ambient(shading), out);
}

fir_status fir_light_solve(const fir_shading* shading, const fir_normals* normals,
                           const fir_mask* mask, fir_light* out, int* rank) {
  FIR_REQUIRE(shading && normals && mask && out, "null argument");
  return Guard([&] {
    const faceir::LightSolve s =
        faceir::SolveLightLsq(shading->shading, normals->normals, mask->mask);
    FromSh(s.light, out);
    if (rank) *rank = s.rank;
  });
}

// Configuration.

fir_status fir_config_create(fir_config** out) {
  FIR_REQUIRE(out, "null output");
  return Guard([&] { *out = new fir_config; });
}

void fir_config_free(fir_config* config) { delete config; }

fir_status fir_config_set_preset(fir_config* config, const char* name) {
  FIR_REQUIRE(config && name, "null argument");
  return Guard([&] {
    config->config.weights = faceir::LossWeights::Preset(name);
    config->preset = name;
  });
}

fir_status fir_config_set_weight(fir_config* config, const char* key, double value) {
  FIR_REQUIRE(config && key, "null argument");
  return Guard([&] {
    faceir::LossWeights w = config->config.weights;
    w.Set(key, value);
    w.Validate();
    config->config.weights = w;
  });
}

fir_status fir_config_get_weight(const fir_config* config, const char* key, double* value) {
  FIR_REQUIRE(config && key && value, "null argument");
  const faceir::LossWeights& w = config->config.weights;
  const std::pair<const char*, double> fields[] = {
      {"lambda_a", w.lambda_a},     {"lambda_s", w.lambda_s},
      {"lambda_n", w.lambda_n},     {"lambda_l", w.lambda_l},
      {"lambda_irec", w.lambda_irec}, {"lambda_srec", w.lambda_srec},
      {"xi", w.xi}};
  for (const auto& [name, v] : fields) {
    if (std::string(key) == name) {
      *value = v;
      return FIR_OK;
    }
  }
  return Fail(FIR_ERR_INVALID_ARGUMENT, std::string("unknown weight: ") + key);
}

fir_status fir_config_load(fir_config* config, const char* path) {
  FIR_REQUIRE(config && path, "null argument");
  return Guard([&] {
    config->config.weights = faceir::LossWeights::Load(path, config->config.weights);
    config->preset = "custom";
  });
}

fir_status fir_config_set_iterations(fir_config* config, int phase1, int phase2) {
  FIR_REQUIRE(config, "null config");
  FIR_REQUIRE(phase1 > 0 && phase2 >= 0, "iteration counts must be positive");
  config->config.phase1_iters = phase1;
  config->config.phase2_iters = phase2;
  return FIR_OK;
}

fir_status fir_config_set_detach(fir_config* config, fir_detach mode) {
  FIR_REQUIRE(config, "null config");
  switch (mode) {
    case FIR_DETACH_NONE: config->config.detach_mode = faceir::DetachMode::kNone; break;
    case FIR_DETACH_LIGHT: config->config.detach_mode = faceir::DetachMode::kDetachLight; break;
    case FIR_DETACH_LIGHT_AND_SHADING:
      config->config.detach_mode = faceir::DetachMode::kDetachLightAndShading;
      break;
    default: return Fail(FIR_ERR_INVALID_ARGUMENT, "unknown detach mode");
  }
  return FIR_OK;
}

fir_status fir_config_parse_detach(const char* name, fir_detach* out) {
  FIR_REQUIRE(name && out, "null argument");
  return Guard([&] {
    switch (faceir::ParseDetachMode(name)) {
      case faceir::DetachMode::kNone: *out = FIR_DETACH_NONE; break;
      case faceir::DetachMode::kDetachLight: *out = FIR_DETACH_LIGHT; break;
      case faceir::DetachMode::kDetachLightAndShading: *out = FIR_DETACH_LIGHT_AND_SHADING; break;
    }
  });
}

fir_status fir_config_set_convergence_tol(fir_config* config, double tol) {
  FIR_REQUIRE(config, "null config");
  FIR_REQUIRE(tol > 0.0, "tolerance must be positive");
  config->config.convergence_tol = tol;
  return FIR_OK;
}

fir_status fir_config_set_freeze_normals(fir_config* config, int freeze) {
  FIR_REQUIRE(config, "null config");
  config->config.freeze_normals_phase2 = freeze != 0;
  return FIR_OK;
}

// Decomposition.

fir_status fir_decompose(const fir_image* image_i, const fir_image* image_j,
                         const fir_mask* mask, const fir_normals* prior_i,
                         const fir_normals* prior_j, const fir_config* config,
                         fir_progress_fn progress, void* user, fir_result** out) {
  FIR_REQUIRE(image_i && image_j && mask && prior_i && config && out, "null argument");
  return Guard([&] {
    faceir::PairInput input;
    input.image_i = image_i->image;
    input.image_j = image_j->image;
    input.mask = mask->mask;
    input.prior_i = prior_i->normals;
    input.prior_j = prior_j ? prior_j->normals : prior_i->normals;
    faceir::ProgressCallback cb;
    if (progress) {
      cb = [progress, user](const faceir::TraceEntry& e) {
        progress(e.iteration, e.phase, e.total, user);
      };
    }
    auto res = std::make_unique<fir_result>();
    res->result = faceir::DecomposePair(input, config->config, cb);
    res->result.preset = config->preset;
    *out = res.release();
  });
}

fir_status fir_result_read(const char* directory, fir_result** out) {
  FIR_REQUIRE(directory && out, "null argument");
  return Guard([&] {
    faceir::ResultFiles files = faceir::ReadResult(directory);
    auto res = std::make_unique<fir_result>();
    faceir::DecompositionResult& r = res->result;
    r.state.albedo_i = std::move(files.albedo_i);
    r.state.albedo_j = std::move(files.albedo_j);
    r.state.shading_i = std::move(files.shading_i);
    r.state.shading_j = std::move(files.shading_j);
    r.state.normals_i = std::move(files.normals_i);
    r.state.normals_j = std::move(files.normals_j);
    r.state.light_i = files.light_i;
    r.state.light_j = files.light_j;
    r.mask = r.state.normals_i.ValidMask();
    r.reconstruction_i = faceir::Render(r.state.albedo_i, r.state.normals_i, r.state.light_i);
    r.reconstruction_j = faceir::Render(r.state.albedo_j, r.state.normals_j, r.state.light_j);
    r.phase1_state = r.state;
    r.trace.converged = true;
    *out = res.release();
  });
}

fir_status fir_result_write(const fir_result* result, const char* directory) {
  FIR_REQUIRE(result && directory, "null argument");
  return Guard([&] { faceir::WriteResult(directory, result->result); });
}

void fir_result_free(fir_result* result) { delete result; }

int fir_result_converged(const fir_result* result) {
  return result && result->result.trace.converged ? 1 : 0;
}

int fir_result_monotone(const fir_result* result) {
  return result && result->result.trace.Monotone() ? 1 : 0;
}

size_t fir_result_trace_size(const fir_result* result) {
  return result ? result->result.trace.size() : 0;
}

fir_status fir_result_trace_total(const fir_result* result, size_t index, double* total) {
  FIR_REQUIRE(result && total, "null argument");
  FIR_REQUIRE(index < result->result.trace.size(), "trace index out of range");
  *total = result->result.trace.entries[index].total;
  return FIR_OK;
}

double fir_result_final_energy(const fir_result* result) {
  return result ? result->result.trace.final_total() : 0.0;
}

const char* fir_result_stop_reason(const fir_result* result) {
  return result ? result->result.trace.stop_reason.c_str() : "";
}

fir_status fir_result_light(const fir_result* result, fir_member member, fir_light* out) {
  FIR_REQUIRE(result && out && ValidMember(member), "invalid argument");
  const faceir::DecompositionState& st = result->result.state;
  FromSh(member == FIR_MEMBER_I ? st.light_i : st.light_j, out);
  return FIR_OK;
}

fir_status fir_result_albedo(const fir_result* result, fir_member member, fir_image** out) {
  FIR_REQUIRE(result && out && ValidMember(member), "invalid argument");
  const faceir::DecompositionState& st = result->result.state;
  return Guard([&] {
    *out = new fir_image{
        faceir::GridCast<faceir::Image>(member == FIR_MEMBER_I ? st.albedo_i : st.albedo_j)};
  });
}

fir_status fir_result_shading(const fir_result* result, fir_member member, fir_shading** out) {
  FIR_REQUIRE(result && out && ValidMember(member), "invalid argument");
  const faceir::DecompositionState& st = result->result.state;
  return Guard(
      [&] { *out = new fir_shading{member == FIR_MEMBER_I ? st.shading_i : st.shading_j}; });
}

fir_status fir_result_normals(const fir_result* result, fir_member member, fir_normals** out) {
  FIR_REQUIRE(result && out && ValidMember(member), "invalid argument");
  const faceir::DecompositionState& st = result->result.state;
  return Guard(
      [&] { *out = new fir_normals{member == FIR_MEMBER_I ? st.normals_i : st.normals_j}; });
}

fir_status fir_result_reconstruction(const fir_result* result, fir_member member,
                                     fir_image** out) {
  FIR_REQUIRE(result && out && ValidMember(member), "invalid argument");
  const faceir::DecompositionResult& r = result->result;
  return Guard([&] {
    *out = new fir_image{member == FIR_MEMBER_I ? r.reconstruction_i : r.reconstruction_j};
  });
}

// Rendering.

fir_status fir_render(const fir_image* albedo, const fir_normals* normals,
                      const fir_light* light, fir_image** out) {
  FIR_REQUIRE(albedo && normals && light && out, "null argument");
  return Guard([&] {
    *out = new fir_image{faceir::Relight(faceir::GridCast<faceir::AlbedoMap>(albedo->image),
                                         normals->normals, ToSh(*light))};
  });
}

fir_status fir_render_shading(const fir_normals* normals, const fir_light* light,
                              fir_shading** out) {
  FIR_REQUIRE(normals && light && out, "null argument");
  return Guard([&] {
    *out = new fir_shading{faceir::EvalShading(normals->normals, ToSh(*light))};
  });
}

fir_status fir_delight(const fir_image* image, const fir_shading* shading, double epsilon,
                       fir_image** out, fir_mask** low_confidence) {
  FIR_REQUIRE(image && shading && out, "null argument");
  return Guard([&] {
    faceir::DelightResult d = faceir::Delight(image->image, shading->shading, epsilon);
    auto img = std::make_unique<fir_image>(fir_image{faceir::GridCast<faceir::Image>(d.albedo)});
    if (low_confidence) *low_confidence = new fir_mask{std::move(d.low_confidence)};
    *out = img.release();
  });
}

fir_status fir_transfer_light(const fir_result* source, fir_member source_member,
                              const fir_result* target, fir_member target_member,
                              fir_image** out) {
  FIR_REQUIRE(source && target && out, "null argument");
  FIR_REQUIRE(ValidMember(source_member) && ValidMember(target_member), "invalid member");
  return Guard([&] {
    *out = new fir_image{faceir::TransferLight(source->result, ToMember(source_member),
                                               target->result, ToMember(target_member))};
  });
}

fir_status fir_blend(const fir_image* foreground, const fir_image* background,
                     const fir_mask* mask, double tolerance, fir_image** out, int* iterations,
                     double* residual) {
  FIR_REQUIRE(foreground && background && mask && out, "null argument");
  return Guard([&] {
    faceir::BlendResult b =
        faceir::PoissonBlend(foreground->image, background->image, mask->mask, tolerance);
    if (iterations) *iterations = b.iterations;
    if (residual) *residual = b.residual;
    *out = new fir_image{std::move(b.image)};
  });
}

// Synthetic data.

void fir_synth_default_options(fir_synth_options* out) {
  if (!out) return;
  out->size = 128;
  out->seed = 1;
  out->prior_perturbation_deg = 0.0;
  out->gaussian_sigma = 0.0;
  out->salt_pepper_fraction = 0.0;
  out->albedo_kind = 0;
}

fir_status fir_synth_write(const fir_synth_options* options, const char* directory) {
  FIR_REQUIRE(options && directory, "null argument");
  FIR_REQUIRE(options->size >= 16, "size must be at least 16");
  FIR_REQUIRE(options->gaussian_sigma >= 0.0, "noise sigma must be non-negative");
  FIR_REQUIRE(options->salt_pepper_fraction >= 0.0 && options->salt_pepper_fraction <= 1.0,
              "salt-pepper fraction must lie in [0, 1]");
  FIR_REQUIRE(options->albedo_kind >= 0 && options->albedo_kind <= 2, "unknown albedo kind");
  return Guard([&] {
    const faceir::SynthScene scene = faceir::DefaultScene(options->size, options->seed,
                                                          options->albedo_kind);
    faceir::SyntheticPair pair =
        faceir::MakePair(scene.albedo, scene.geometry.normals, scene.light_i, scene.light_j,
                         scene.geometry.mask, options->prior_perturbation_deg, options->seed);
    if (options->gaussian_sigma > 0.0) {
      pair.input.image_i =
          faceir::AddGaussianNoise(pair.input.image_i, options->gaussian_sigma, options->seed + 100);
      pair.input.image_j =
          faceir::AddGaussianNoise(pair.input.image_j, options->gaussian_sigma, options->seed + 200);
    }
    if (options->salt_pepper_fraction > 0.0) {
      pair.input.image_i = faceir::AddSaltPepper(pair.input.image_i,
                                                 options->salt_pepper_fraction, options->seed + 300);
      pair.input.image_j = faceir::AddSaltPepper(pair.input.image_j,
                                                 options->salt_pepper_fraction, options->seed + 400);
    }
    faceir::WriteSyntheticPair(directory, pair);
  });
}

// Metrics.

fir_status fir_angular_error(const fir_normals* predicted, const fir_normals* truth,
                             const fir_mask* mask, const double* thresholds, size_t count,
                             double* mean, double* std_dev, double* pct_under) {
  FIR_REQUIRE(predicted && truth && mask, "null argument");
  FIR_REQUIRE(count == 0 || (thresholds && pct_under), "null thresholds");
  return Guard([&] {
    const std::vector<double> t(thresholds, thresholds + count);
    const faceir::AngularStats s =
        faceir::AngularErrorStats(predicted->normals, truth->normals, mask->mask, t);
    if (mean) *mean = s.mean_deg;
    if (std_dev) *std_dev = s.std_deg;
    for (size_t k = 0; k < count; ++k) pct_under[k] = s.FractionUnder(thresholds[k]);
  });
}

fir_status fir_image_mae(const fir_image* a, const fir_image* b, const fir_mask* mask,
                         double* out) {
  FIR_REQUIRE(a && b && mask && out, "null argument");
  return Guard([&] { *out = faceir::Mae(a->image, b->image, mask->mask); });
}

fir_status fir_image_rmse(const fir_image* a, const fir_image* b, const fir_mask* mask,
                          double* out) {
  FIR_REQUIRE(a && b && mask && out, "null argument");
  return Guard([&] { *out = faceir::Rmse(a->image, b->image, mask->mask); });
}

fir_status fir_shading_mae(const fir_shading* a, const fir_shading* b, const fir_mask* mask,
                           double* out) {
  FIR_REQUIRE(a && b && mask && out, "null argument");
  return Guard([&] { *out = faceir::Mae(a->shading, b->shading, mask->mask); });
}

fir_status fir_kmeans_lights(const fir_light* lights, size_t count, int k, uint64_t seed,
                             int* assignments, double* inertia) {
  FIR_REQUIRE(lights && assignments, "null argument");
  return Guard([&] {
    std::vector<faceir::ShCoefficients> v;
    v.reserve(count);
    for (size_t q = 0; q < count; ++q) v.push_back(ToSh(lights[q]));
    const faceir::KMeansResult r = faceir::KMeansLights(v, k, seed);
    std::copy(r.assignments.begin(), r.assignments.end(), assignments);
    if (inertia) *inertia = r.inertia();
  });
}

}  // extern "C"
