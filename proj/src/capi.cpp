// Copyright 2026 The pvqflow Authors
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

#include "pvqflow/pvqflow.h"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <limits>
#include <new>
#include <span>
#include <string>

#include "pvqflow/attributes.hpp"
#include "pvqflow/ccnf.hpp"
#include "pvqflow/config.hpp"
#include "pvqflow/error.hpp"
#include "pvqflow/formats.hpp"
#include "pvqflow/nn.hpp"
#include "pvqflow/pipeline.hpp"

struct pvq_config {
  pvq::config::RunConfig value;
};

struct pvq_model {
  pvq::nn::Mlp value;
};

struct pvq_dataset {
  pvq::train::Dataset value;
};

namespace {

thread_local std::string g_last_error;

struct ArgumentError : std::invalid_argument {
  using std::invalid_argument::invalid_argument;
};

void require(bool ok, const char* what) {
  if (!ok) throw ArgumentError(what);
}

pvq_status fail(pvq_status status, const char* message) {
  g_last_error = message;
  return status;
}

template <class F>
pvq_status guarded(F&& body) {
  try {
    body();
    g_last_error.clear();
    return PVQ_OK;
  } catch (const ArgumentError& e) {
    return fail(PVQ_ERR_INVALID_ARGUMENT, e.what());
  } catch (const pvq::Error& e) {
    switch (e.kind()) {
      case pvq::ErrorKind::kConfig: return fail(PVQ_ERR_CONFIG, e.what());
      case pvq::ErrorKind::kIo: return fail(PVQ_ERR_IO, e.what());
      case pvq::ErrorKind::kNumerical: return fail(PVQ_ERR_NUMERICAL, e.what());
      case pvq::ErrorKind::kDomain: return fail(PVQ_ERR_DOMAIN, e.what());
    }
    return fail(PVQ_ERR_INTERNAL, e.what());
  } catch (const std::bad_alloc&) {
    return fail(PVQ_ERR_INTERNAL, "out of memory");
  } catch (const std::exception& e) {
    return fail(PVQ_ERR_INTERNAL, e.what());
  } catch (...) {
    return fail(PVQ_ERR_INTERNAL, "unknown error");
  }
}

const pvq::nn::Mlp& model_of(const pvq_model* m, std::size_t dim) {
  require(m != nullptr, "model is null");
  require(dim == m->value.dim(), "vector length does not match the model dimension");
  return m->value;
}

std::span<const double> in(const double* p, std::size_t n, const char* name) {
  require(p != nullptr, name);
  return {p, n};
}

pvq::ode::SolverConfig solver_of(const pvq_solver_options* o) {
  require(o != nullptr, "solver options are null");
  pvq::ode::SolverConfig s;
  switch (o->method) {
    case PVQ_METHOD_RK4: s = pvq::ode::SolverConfig::fixed(o->n_steps); break;
    case PVQ_METHOD_DOPRI5:
      s = pvq::ode::SolverConfig::adaptive(o->rtol, o->atol, o->max_steps);
      break;
    default: throw ArgumentError("unknown solver method");
  }
  s.validate();
  return s;
}

pvq::flow::TraceEstimatorConfig trace_of(const pvq_trace_options* o) {
  require(o != nullptr, "trace options are null");
  pvq::flow::TraceEstimatorConfig t;
  switch (o->mode) {
    case PVQ_TRACE_EXACT: t.mode = pvq::flow::TraceMode::kExact; break;
    case PVQ_TRACE_HUTCHINSON: t.mode = pvq::flow::TraceMode::kHutchinson; break;
    default: throw ArgumentError("unknown trace mode");
  }
  t.n_probes = o->n_probes;
  t.seed = o->seed;
  t.validate();
  return t;
}

void copy_out(const std::vector<double>& v, double* out) {
  require(out != nullptr, "output buffer is null");
  std::copy(v.begin(), v.end(), out);
}

pvq_grad_check_summary to_c(const pvq::train::GradCheckReport& r) {
  return {r.points, r.parameters_checked, r.max_relative_error, r.tolerance, r.passed ? 1 : 0};
}

}  // namespace

extern "C" {

const char* pvq_last_error(void) { return g_last_error.c_str(); }

const char* pvq_status_name(pvq_status status) {
  switch (status) {
    case PVQ_OK: return "ok";
    case PVQ_ERR_INVALID_ARGUMENT: return "invalid argument";
    case PVQ_ERR_CONFIG: return "configuration error";
    case PVQ_ERR_IO: return "i/o error";
    case PVQ_ERR_NUMERICAL: return "numerical error";
    case PVQ_ERR_DOMAIN: return "domain error";
    case PVQ_ERR_INTERNAL: return "internal error";
  }
  return "unknown status";
}

const char* pvq_version(void) { return "1.0.0"; }

pvq_status pvq_config_new(pvq_config** out) {
  return guarded([&] {
    require(out != nullptr, "output handle is null");
    *out = new pvq_config{};
  });
}

pvq_status pvq_config_load(const char* path, pvq_config** out) {
  return guarded([&] {
    require(path != nullptr && out != nullptr, "null argument");
    *out = new pvq_config{pvq::config::load_config(path)};
  });
}

pvq_status pvq_config_parse(const char* text, pvq_config** out) {
  return guarded([&] {
    require(text != nullptr && out != nullptr, "null argument");
    *out = new pvq_config{pvq::config::parse_config(text)};
  });
}

pvq_status pvq_config_set(pvq_config* cfg, const char* key, const char* value) {
  return guarded([&] {
    require(cfg != nullptr && key != nullptr && value != nullptr, "null argument");
    pvq::config::set_value(cfg->value, key, value);
  });
}

pvq_status pvq_config_get(const pvq_config* cfg, const char* key, char* buf, size_t capacity,
                          size_t* needed) {
  return guarded([&] {
    require(cfg != nullptr && key != nullptr, "null argument");
    require(buf != nullptr || capacity == 0, "buffer is null");
    const std::string v = pvq::config::get_value(cfg->value, key);
    if (needed != nullptr) *needed = v.size() + 1;
    if (capacity > v.size()) std::memcpy(buf, v.c_str(), v.size() + 1);
  });
}

pvq_status pvq_config_validate(const pvq_config* cfg) {
  return guarded([&] {
    require(cfg != nullptr, "config is null");
    cfg->value.validate();
  });
}

void pvq_config_free(pvq_config* cfg) { delete cfg; }

pvq_status pvq_model_new(size_t dim, size_t hidden, size_t hidden_layers, uint64_t seed,
                         double output_scale, pvq_model** out) {
  return guarded([&] {
    require(out != nullptr, "output handle is null");
    pvq::nn::Mlp net(dim, hidden, hidden_layers);
    net.initialize(seed, output_scale);
    *out = new pvq_model{std::move(net)};
  });
}

pvq_status pvq_model_load(const char* path, pvq_model** out) {
  return guarded([&] {
    require(path != nullptr && out != nullptr, "null argument");
    *out = new pvq_model{pvq::formats::read_checkpoint(path)};
  });
}

pvq_status pvq_model_save(const pvq_model* model, const char* path) {
  return guarded([&] {
    require(model != nullptr && path != nullptr, "null argument");
    pvq::formats::write_checkpoint(path, model->value);
  });
}

size_t pvq_model_dim(const pvq_model* model) { return model ? model->value.dim() : 0; }

size_t pvq_model_num_params(const pvq_model* model) {
  return model ? model->value.num_params() : 0;
}

pvq_status pvq_model_get_params(const pvq_model* model, double* out, size_t count) {
  return guarded([&] {
    require(model != nullptr && out != nullptr, "null argument");
    require(count == model->value.num_params(), "parameter count mismatch");
    const auto p = model->value.params();
    std::copy(p.begin(), p.end(), out);
  });
}

pvq_status pvq_model_set_params(pvq_model* model, const double* values, size_t count) {
  return guarded([&] {
    require(model != nullptr && values != nullptr, "null argument");
    require(count == model->value.num_params(), "parameter count mismatch");
    std::copy(values, values + count, model->value.params().begin());
  });
}

void pvq_model_free(pvq_model* model) { delete model; }

pvq_solver_options pvq_solver_defaults(void) {
  const pvq::ode::SolverConfig s;
  return {s.method == pvq::ode::Method::kRk4Fixed ? PVQ_METHOD_RK4 : PVQ_METHOD_DOPRI5, s.n_steps,
          s.rtol, s.atol, s.max_steps};
}

pvq_trace_options pvq_trace_defaults(void) {
  const pvq::flow::TraceEstimatorConfig t;
  return {t.mode == pvq::flow::TraceMode::kExact ? PVQ_TRACE_EXACT : PVQ_TRACE_HUTCHINSON,
          t.n_probes, t.seed};
}

pvq_status pvq_vector_field(const pvq_model* model, const double* z, size_t dim, double t, double a,
                            double* out) {
  return guarded([&] {
    const auto& net = model_of(model, dim);
    copy_out(pvq::flow::vector_field(net, in(z, dim, "z is null"), t, a), out);
  });
}

pvq_status pvq_divergence(const pvq_model* model, const double* z, size_t dim, double t, double a,
                          const pvq_trace_options* trace, uint64_t stream, double* out) {
  return guarded([&] {
    const auto& net = model_of(model, dim);
    require(out != nullptr, "output is null");
    const auto tc = trace_of(trace);
    const auto zs = in(z, dim, "z is null");
    *out = tc.mode == pvq::flow::TraceMode::kExact
               ? pvq::flow::divergence_exact(net, zs, t, a)
               : pvq::flow::divergence_hutchinson(net, zs, t, a, tc, stream);
  });
}

pvq_status pvq_transform_to_base(const pvq_model* model, const double* s, size_t dim, double a,
                                 const pvq_solver_options* solver, const pvq_trace_options* trace,
                                 uint64_t stream, double* z0_out, double* logdet_out) {
  return guarded([&] {
    const auto& net = model_of(model, dim);
    require(logdet_out != nullptr, "logdet output is null");
    const auto r = pvq::flow::transform_to_base(net, in(s, dim, "s is null"), a, solver_of(solver),
                                                trace_of(trace), stream);
    copy_out(r.z0, z0_out);
    *logdet_out = r.logdet;
  });
}

pvq_status pvq_transform_from_base(const pvq_model* model, const double* z0, size_t dim,
                                   double a_target, const pvq_solver_options* solver,
                                   double* s_out) {
  return guarded([&] {
    const auto& net = model_of(model, dim);
    copy_out(pvq::flow::transform_from_base(net, in(z0, dim, "z0 is null"), a_target,
                                            solver_of(solver)),
             s_out);
  });
}

pvq_status pvq_log_likelihood(const pvq_model* model, const double* s, size_t dim, double a,
                              const pvq_solver_options* solver, const pvq_trace_options* trace,
                              uint64_t stream, double* out) {
  return guarded([&] {
    const auto& net = model_of(model, dim);
    require(out != nullptr, "output is null");
    *out = pvq::flow::log_likelihood(net, in(s, dim, "s is null"), a, solver_of(solver),
                                     trace_of(trace), stream);
  });
}

pvq_status pvq_manipulate(const pvq_model* model, const double* s, size_t dim, double a,
                          double delta, const pvq_solver_options* solver, double* out) {
  return guarded([&] {
    const auto& net = model_of(model, dim);
    copy_out(pvq::flow::manipulate(net, in(s, dim, "s is null"), a, delta, solver_of(solver)), out);
  });
}

pvq_status pvq_dataset_load(const char* embeddings_path, const char* attributes_path,
                            pvq_dataset** out) {
  return guarded([&] {
    require(embeddings_path != nullptr && out != nullptr, "null argument");
    *out = new pvq_dataset{attributes_path != nullptr
                               ? pvq::formats::read_dataset(embeddings_path, attributes_path)
                               : pvq::formats::read_embeddings(embeddings_path)};
  });
}

size_t pvq_dataset_size(const pvq_dataset* data) { return data ? data->value.size() : 0; }

size_t pvq_dataset_dim(const pvq_dataset* data) { return data ? data->value.dim : 0; }

pvq_status pvq_dataset_row(const pvq_dataset* data, size_t index, double* out, size_t dim) {
  return guarded([&] {
    require(data != nullptr && out != nullptr, "null argument");
    require(index < data->value.size(), "row index out of range");
    require(dim == data->value.dim, "row length mismatch");
    const auto row = data->value.row(index);
    std::copy(row.begin(), row.end(), out);
  });
}

pvq_status pvq_dataset_attribute(const pvq_dataset* data, size_t index, double* out) {
  return guarded([&] {
    require(data != nullptr && out != nullptr, "null argument");
    require(index < data->value.attributes.size(), "attribute index out of range");
    *out = data->value.attributes[index];
  });
}

void pvq_dataset_free(pvq_dataset* data) { delete data; }

pvq_status pvq_run_gen(const pvq_config* cfg, pvq_gen_summary* out) {
  return guarded([&] {
    require(cfg != nullptr, "config is null");
    const auto r = pvq::pipeline::run_gen(cfg->value);
    if (out != nullptr) *out = {r.n, r.n_heldout, r.dim, r.seed};
  });
}

pvq_status pvq_run_train(const pvq_config* cfg, int resume, pvq_train_summary* out) {
  return guarded([&] {
    require(cfg != nullptr, "config is null");
    const auto r = pvq::pipeline::run_train(cfg->value, resume != 0);
    if (out == nullptr) return;
    constexpr double nan = std::numeric_limits<double>::quiet_NaN();
    *out = {};
    out->first_iteration = r.first_iteration;
    out->iterations = r.iterations;
    out->initial_loss = r.initial_loss.value_or(nan);
    out->final_loss = r.final_loss.value_or(nan);
    out->grad_checked = r.grad_check.has_value() ? 1 : 0;
    if (r.grad_check) out->grad_check = to_c(*r.grad_check);
  });
}

pvq_status pvq_run_manipulate(const pvq_config* cfg, pvq_manipulate_summary* out) {
  return guarded([&] {
    require(cfg != nullptr, "config is null");
    const auto r = pvq::pipeline::run_manipulate(cfg->value);
    if (out != nullptr) *out = {r.embeddings, r.factors.size()};
  });
}

pvq_status pvq_run_analyze(const pvq_config* cfg, pvq_analyze_summary* out) {
  return guarded([&] {
    require(cfg != nullptr, "config is null");
    const auto r = pvq::pipeline::run_analyze(cfg->value);
    if (out == nullptr) return;
    *out = {};
    out->records = r.records;
    for (const auto& e : r.correlations.entries) {
      if (e.feature != "recovered_attribute") continue;
      out->has_correlation = 1;
      out->r = e.r;
      out->slope = e.slope;
      out->n = e.n;
    }
  });
}

pvq_status pvq_run_grad_check(const pvq_config* cfg, pvq_grad_check_summary* out) {
  return guarded([&] {
    require(cfg != nullptr, "config is null");
    const auto r = pvq::pipeline::run_grad_check(cfg->value);
    if (out != nullptr) *out = to_c(r);
  });
}

pvq_status pvq_estimate_attribute(const pvq_config* cfg, const char* features_path, double* out,
                                  size_t* active_frames) {
  return guarded([&] {
    require(cfg != nullptr && features_path != nullptr && out != nullptr, "null argument");
    const auto features = pvq::attributes::read_frame_features(features_path);
    const auto mask = pvq::attributes::energy_vad(features, cfg->value.vad);
    *out = pvq::attributes::global_attribute(features, mask);
    if (active_frames != nullptr) {
      *active_frames = static_cast<std::size_t>(std::count(mask.begin(), mask.end(), true));
    }
  });
}

}  // extern "C"
