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

// maskaudit: runs experiment stages and the reader study server.
#include <pthread.h>
#include <signal.h>

#include <cstdio>
#include <string>
#include <thread>
#include <vector>

#include <CLI11.hpp>

#include "maskaudit/maskaudit.h"

namespace {

constexpr const char* kStages[] = {"generate", "prepare", "train",     "evaluate",
                                   "sweep",    "embed",   "attribute", "report"};

// 1 for problems the user can fix in the invocation or config, 2 otherwise.
int ExitCode(mka_status s) {
  switch (s) {
    case MKA_OK: return 0;
    case MKA_CONFIG_ERROR:
    case MKA_INVALID_ARGUMENT:
    case MKA_SCHEMA_ERROR: return 1;
    default: return 2;
  }
}

int Report(mka_status s, const char* what) {
  std::fprintf(stderr, "maskaudit: %s failed (%s): %s\n", what, mka_status_name(s),
               mka_last_error());
  return ExitCode(s);
}

struct Experiment {
  mka_experiment* handle = nullptr;
  ~Experiment() { mka_experiment_free(handle); }
};

mka_status Open(const std::string& config, int max_parallel, Experiment* e) {
  mka_status s = mka_experiment_open(config.c_str(), &e->handle);
  if (s == MKA_OK && max_parallel >= 0) {
    s = mka_experiment_set_max_parallel(e->handle, max_parallel);
  }
  return s;
}

int RunStages(const std::string& config, int max_parallel,
              const std::vector<std::string>& stages) {
  Experiment e;
  if (mka_status s = Open(config, max_parallel, &e); s != MKA_OK) return Report(s, "config");
  for (const std::string& stage : stages) {
    mka_stage_result r{};
    if (mka_status s = mka_experiment_run_stage(e.handle, stage.c_str(), &r); s != MKA_OK) {
      return Report(s, stage.c_str());
    }
  }
  char* root = nullptr;
  if (mka_experiment_output_root(e.handle, &root) == MKA_OK) {
    std::printf("%s\n", root);
    mka_string_free(root);
  }
  return 0;
}

int ServeStudy(const std::string& config, const std::string& run_dir, const std::string& host,
               int port, const std::string& static_dir) {
  const std::string path = config.empty() ? run_dir + "/config.json" : config;
  Experiment e;
  if (mka_status s = Open(path, -1, &e); s != MKA_OK) return Report(s, "config");
  mka_study_server* server = nullptr;
  if (mka_status s = mka_study_server_create(e.handle, &server); s != MKA_OK) {
    return Report(s, "serve-study");
  }
  // Signals are taken by a dedicated thread so the server stops cleanly.
  sigset_t set;
  sigemptyset(&set);
  sigaddset(&set, SIGINT);
  sigaddset(&set, SIGTERM);
  pthread_sigmask(SIG_BLOCK, &set, nullptr);
  int bound = 0;
  if (mka_status s = mka_study_server_start(server, host.c_str(), port,
                                            static_dir.empty() ? nullptr : static_dir.c_str(),
                                            &bound);
      s != MKA_OK) {
    mka_study_server_free(server);
    return Report(s, "serve-study");
  }
  std::printf("reader study on http://%s:%d\n", host.c_str(), bound);
  std::fflush(stdout);
  std::thread waiter([&] {
    int sig = 0;
    sigwait(&set, &sig);
    mka_study_server_stop(server);
  });
  const mka_status s = mka_study_server_wait(server);
  // Wake the signal thread if the server ended on its own.
  pthread_kill(waiter.native_handle(), SIGTERM);
  waiter.join();
  mka_study_server_free(server);
  return s == MKA_OK ? 0 : Report(s, "serve-study");
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Mask-based shortcut-learning audit"};
  app.require_subcommand(1);
  app.set_version_flag("--version", mka_version());
  int log_level = 1;
  app.add_option("--log-level", log_level, "0 debug, 1 info, 2 warning, 3 error")
      ->check(CLI::Range(0, 3));

  std::string config;
  int max_parallel = -1;
  std::vector<std::string> chosen;
  for (const char* stage : kStages) {
    CLI::App* sub = app.add_subcommand(stage, std::string("Run the ") + stage + " stage");
    sub->add_option("--config", config, "Experiment config (JSON)")
        ->required()
        ->check(CLI::ExistingFile);
    sub->add_option("--max-parallel", max_parallel, "Worker threads, 0 for every core")
        ->check(CLI::NonNegativeNumber);
    sub->callback([&chosen, stage] { chosen.push_back(stage); });
  }
  CLI::App* all = app.add_subcommand("run", "Run every stage in order");
  all->add_option("--config", config, "Experiment config (JSON)")
      ->required()
      ->check(CLI::ExistingFile);
  all->add_option("--max-parallel", max_parallel, "Worker threads, 0 for every core")
      ->check(CLI::NonNegativeNumber);
  all->callback([&chosen] { chosen.assign(std::begin(kStages), std::end(kStages)); });

  std::string run_dir, host = "127.0.0.1", static_dir;
  int port = 8080;
  CLI::App* serve = app.add_subcommand("serve-study", "Serve the reader study over HTTP");
  auto* cfg = serve->add_option("--config", config, "Experiment config (JSON)")
                  ->check(CLI::ExistingFile);
  auto* dir = serve->add_option("--run-dir", run_dir, "Output root of a finished run")
                  ->check(CLI::ExistingDirectory);
  cfg->excludes(dir);
  serve->add_option("--host", host, "Bind address");
  serve->add_option("--port", port, "Port, 0 for any free port")->check(CLI::Range(0, 65535));
  serve->add_option("--static-dir", static_dir, "Annotation UI build to serve at /")
      ->check(CLI::ExistingDirectory);

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForVersion& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    std::fprintf(stderr, "\n%s", app.help().c_str());
    return 1;
  }
  mka_set_log_level(log_level);

  if (serve->parsed()) {
    if (config.empty() && run_dir.empty()) {
      std::fprintf(stderr, "serve-study needs --config or --run-dir\n");
      return 1;
    }
    return ServeStudy(config, run_dir, host, port, static_dir);
  }
  return RunStages(config, max_parallel, chosen);
}
