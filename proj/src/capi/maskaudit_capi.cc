// Copyright 2026 The MaskAudit Authors. All Rights Reserved.
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

#include "maskaudit/maskaudit.h"

#include <cstdlib>
#include <cstring>
#include <exception>
#include <filesystem>
#include <memory>
#include <mutex>
#include <new>
#include <string>

#include "core/error.h"
#include "core/file_util.h"
#include "core/log.h"
#include "evaluation/auc.h"
#include "evaluation/delong.h"
#include "experiment/stages.h"

struct mka_experiment {
  std::unique_ptr<maskaudit::Experiment> impl;
};

struct mka_study_server {
  std::unique_ptr<maskaudit::StudyServer> impl;
};

namespace {

namespace fs = std::filesystem;
using maskaudit::ErrorCode;

thread_local std::string g_last_error;

mka_status ToStatus(ErrorCode code) {
  // The enums share their numbering.
  return static_cast<mka_status>(static_cast<int>(code));
}

mka_status Fail(mka_status status, const std::string& message) {
  g_last_error = message;
  return status;
}

// Runs `fn`, turning every exception into a status and a message.
template <typename Fn>
mka_status Guard(Fn&& fn) {
  g_last_error.clear();
  try {
    fn();
    return MKA_OK;
  } catch (const maskaudit::Error& e) {
    return Fail(ToStatus(e.code()), e.what());
  } catch (const std::bad_alloc&) {
    return Fail(MKA_INTERNAL, "out of memory");
  } catch (const fs::filesystem_error& e) {
    return Fail(MKA_IO_ERROR, e.what());
  } catch (const std::exception& e) {
    return Fail(MKA_INTERNAL, e.what());
  } catch (...) {
    return Fail(MKA_INTERNAL, "unknown exception");
  }
}

char* CopyString(const std::string& s) {
  char* out = static_cast<char*>(std::malloc(s.size() + 1));
  if (out == nullptr) throw std::bad_alloc();
  std::memcpy(out, s.c_str(), s.size() + 1);
  return out;
}

#define MKA_REQUIRE(cond, what)                                  \
  do {                                                           \
    if (!(cond)) return Fail(MKA_INVALID_ARGUMENT, what);        \
  } while (0)

std::mutex g_log_mu;
mka_log_fn g_log_fn = nullptr;
void* g_log_user = nullptr;

}  // namespace

extern "C" {

const char* mka_version(void) { return "0.1.0"; }

const char* mka_status_name(mka_status status) {
  switch (status) {
    case MKA_OK: return "OK";
    case MKA_INTERNAL: return "Internal";
    default: break;
  }
  const int v = static_cast<int>(status);
  if (v >= static_cast<int>(ErrorCode::kInvalidArgument) &&
      v <= static_cast<int>(ErrorCode::kConfigError)) {
    return maskaudit::ErrorCodeName(static_cast<ErrorCode>(v)).data();
  }
  return "Unknown";
}

const char* mka_last_error(void) { return g_last_error.c_str(); }

void mka_string_free(char* s) { std::free(s); }

void mka_set_log_callback(mka_log_fn fn, void* user) {
  {
    std::lock_guard lock(g_log_mu);
    g_log_fn = fn;
    g_log_user = user;
  }
  if (fn == nullptr) {
    maskaudit::SetLogSink(nullptr);
    return;
  }
  maskaudit::SetLogSink([](maskaudit::LogLevel level, const std::string& message) {
    mka_log_fn f;
    void* u;
    {
      std::lock_guard lock(g_log_mu);
      f = g_log_fn;
      u = g_log_user;
    }
    if (f != nullptr) f(static_cast<int>(level), message.c_str(), u);
  });
}

void mka_set_log_level(int level) {
  if (level < 0) level = 0;
  if (level > 3) level = 3;
  maskaudit::SetMinLogLevel(static_cast<maskaudit::LogLevel>(level));
}

mka_status mka_experiment_open(const char* config_path, mka_experiment** out) {
  MKA_REQUIRE(config_path != nullptr && out != nullptr, "config_path and out are required");
  *out = nullptr;
  return Guard([&] {
    auto e = std::make_unique<mka_experiment>();
    e->impl = std::make_unique<maskaudit::Experiment>(maskaudit::LoadExperimentConfig(config_path));
    *out = e.release();
  });
}

mka_status mka_experiment_open_json(const char* config_json, const char* base_dir,
                                    mka_experiment** out) {
  MKA_REQUIRE(config_json != nullptr && out != nullptr, "config_json and out are required");
  *out = nullptr;
  return Guard([&] {
    nlohmann::json j;
    try {
      j = nlohmann::json::parse(config_json);
    } catch (const nlohmann::json::exception& e) {
      maskaudit::Fail(ErrorCode::kConfigError, std::string("config is not valid JSON: ") + e.what());
    }
    const char* env = std::getenv("MASKAUDIT_DATA_ROOT");
    const fs::path base = base_dir != nullptr ? fs::path(base_dir) : fs::current_path();
    auto e = std::make_unique<mka_experiment>();
    e->impl = std::make_unique<maskaudit::Experiment>(
        maskaudit::ParseExperimentConfig(j, fs::absolute(base), env ? env : ""));
    *out = e.release();
  });
}

void mka_experiment_free(mka_experiment* experiment) { delete experiment; }

mka_status mka_experiment_set_max_parallel(mka_experiment* experiment, int n) {
  MKA_REQUIRE(experiment != nullptr, "experiment is NULL");
  MKA_REQUIRE(n >= 0, "max_parallel must be >= 0");
  g_last_error.clear();
  experiment->impl->set_max_parallel(n);
  return MKA_OK;
}

mka_status mka_experiment_run_stage(mka_experiment* experiment, const char* stage,
                                    mka_stage_result* result) {
  MKA_REQUIRE(experiment != nullptr && stage != nullptr, "experiment and stage are required");
  return Guard([&] {
    const maskaudit::StageResult r = experiment->impl->Run(maskaudit::ParseStage(stage));
    if (result != nullptr) {
      result->units_run = r.units_run;
      result->units_skipped = r.units_skipped;
    }
  });
}

mka_status mka_experiment_output_root(const mka_experiment* experiment, char** out) {
  MKA_REQUIRE(experiment != nullptr && out != nullptr, "experiment and out are required");
  *out = nullptr;
  return Guard([&] { *out = CopyString(experiment->impl->config().output_root.string()); });
}

mka_status mka_experiment_config_json(const mka_experiment* experiment, char** out) {
  MKA_REQUIRE(experiment != nullptr && out != nullptr, "experiment and out are required");
  *out = nullptr;
  return Guard([&] { *out = CopyString(experiment->impl->config().ToJson().dump(2)); });
}

mka_status mka_experiment_summary_json(const mka_experiment* experiment, char** out) {
  MKA_REQUIRE(experiment != nullptr && out != nullptr, "experiment and out are required");
  *out = nullptr;
  return Guard([&] {
    const fs::path p = experiment->impl->config().output_root / "summary.json";
    if (!fs::exists(p)) {
      maskaudit::Fail(ErrorCode::kNotFound, "no summary at " + p.string() + "; run `report`");
    }
    *out = CopyString(maskaudit::ReadTextFile(p));
  });
}

mka_status mka_study_server_create(mka_experiment* experiment, mka_study_server** out) {
  MKA_REQUIRE(experiment != nullptr && out != nullptr, "experiment and out are required");
  *out = nullptr;
  return Guard([&] {
    auto s = std::make_unique<mka_study_server>();
    s->impl = std::make_unique<maskaudit::StudyServer>(experiment->impl.get());
    *out = s.release();
  });
}

mka_status mka_study_server_start(mka_study_server* server, const char* host, int port,
                                  const char* static_dir, int* bound_port) {
  MKA_REQUIRE(server != nullptr, "server is NULL");
  MKA_REQUIRE(port >= 0 && port <= 65535, "port must lie in 0..65535");
  return Guard([&] {
    maskaudit::StudyServiceOptions options;
    if (host != nullptr) options.host = host;
    options.port = port;
    if (static_dir != nullptr) options.static_dir = fs::path(static_dir);
    const int p = server->impl->Start(options);
    if (bound_port != nullptr) *bound_port = p;
  });
}

mka_status mka_study_server_wait(mka_study_server* server) {
  MKA_REQUIRE(server != nullptr, "server is NULL");
  return Guard([&] { server->impl->Wait(); });
}

void mka_study_server_stop(mka_study_server* server) {
  if (server != nullptr) server->impl->Stop();
}

void mka_study_server_free(mka_study_server* server) { delete server; }

mka_status mka_auc(const double* scores, const uint8_t* labels, size_t n, double* auc,
                   int* degenerate) {
  MKA_REQUIRE(auc != nullptr, "auc is NULL");
  MKA_REQUIRE(n == 0 || (scores != nullptr && labels != nullptr), "inputs are NULL");
  return Guard([&] {
    const maskaudit::AucValue v =
        maskaudit::ComputeAuc(std::span<const double>(scores, n), std::span<const uint8_t>(labels, n));
    *auc = v.value;
    if (degenerate != nullptr) *degenerate = v.degenerate ? 1 : 0;
  });
}

mka_status mka_delong(const double* scores_a, const double* scores_b, const uint8_t* labels,
                      size_t n, mka_delong_result* out) {
  MKA_REQUIRE(out != nullptr, "out is NULL");
  MKA_REQUIRE(n == 0 || (scores_a != nullptr && scores_b != nullptr && labels != nullptr),
              "inputs are NULL");
  return Guard([&] {
    const maskaudit::DelongResult r = maskaudit::DelongTest(
        std::span<const double>(scores_a, n), std::span<const double>(scores_b, n),
        std::span<const uint8_t>(labels, n));
    *out = {r.auc_a, r.auc_b, r.variance_diff, r.z, r.p_value};
  });
}

mka_status mka_significant_across_folds(const double* p_values, size_t n, double alpha,
                                        int min_folds, int* significant) {
  MKA_REQUIRE(significant != nullptr, "significant is NULL");
  MKA_REQUIRE(n == 0 || p_values != nullptr, "p_values is NULL");
  return Guard([&] {
    *significant = maskaudit::SignificantAcrossFolds(std::span<const double>(p_values, n),
                                                     alpha, min_folds)
                       ? 1
                       : 0;
  });
}

}  // extern "C"
