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

#include "study/service.h"

#include <future>
#include <map>
#include <mutex>
#include <thread>

#include <httplib.h>

#include "core/error.h"
#include "core/png_io.h"

namespace maskaudit {
namespace {

int HttpStatus(ErrorCode code) {
  switch (code) {
    case ErrorCode::kNotFound: return 404;
    case ErrorCode::kPhaseClosed:
    case ErrorCode::kIncompleteRun: return 409;
    case ErrorCode::kInvalidArgument:
    case ErrorCode::kSchemaError: return 400;
    default: return 500;
  }
}

void SendJson(httplib::Response& res, int status, const nlohmann::json& body) {
  res.status = status;
  res.set_content(body.dump(), "application/json");
}

void SendError(httplib::Response& res, int status, std::string_view code,
               const std::string& message) {
  SendJson(res, status, {{"error", code}, {"message", message}});
}

std::string RequireParam(const httplib::Request& req, const char* name) {
  const std::string v = req.get_param_value(name);
  if (v.empty()) Fail(ErrorCode::kInvalidArgument, std::string("missing query parameter ") + name);
  return v;
}

nlohmann::json ProgressJson(const PhaseProgress& p) {
  return {{"done", p.done}, {"total", p.total}};
}

}  // namespace

struct StudyService::Impl {
  StudySession* session;
  const DatasetManifest* truth;
  ItemImageFn images;
  httplib::Server server;
  std::thread thread;
  std::mutex thread_mu;
  std::shared_future<void> finished;
  std::mutex png_mu;
  std::map<std::string, std::string> png_cache;

  // Runs a handler, translating library errors into JSON responses.
  template <typename Fn>
  httplib::Server::Handler Wrap(Fn fn) {
    return [fn](const httplib::Request& req, httplib::Response& res) {
      try {
        fn(req, res);
      } catch (const Error& e) {
        SendError(res, HttpStatus(e.code()), ErrorCodeName(e.code()), e.what());
      } catch (const std::exception& e) {
        SendError(res, 500, "Internal", e.what());
      }
    };
  }

  std::string Png(const StudyItem& item) {
    {
      std::lock_guard lock(png_mu);
      const auto it = png_cache.find(item.item_id);
      if (it != png_cache.end()) return it->second;
    }
    const std::vector<uint8_t> bytes = EncodePngImage(images(item));
    std::string s(bytes.begin(), bytes.end());
    std::lock_guard lock(png_mu);
    png_cache.emplace(item.item_id, s);
    return s;
  }

  void Routes() {
    server.Get("/api/classes", Wrap([this](const httplib::Request&, httplib::Response& res) {
      SendJson(res, 200,
               {{"class_names", session->class_names()},
                {"extra", {std::string(kOtherLabel), std::string(kNoneLabel)}}});
    }));
    server.Get(R"(/api/study/([a-z]+)/next)",
               Wrap([this](const httplib::Request& req, httplib::Response& res) {
                 const StudyPhase phase = ParsePhase(req.matches[1].str());
                 const std::string annotator = RequireParam(req, "annotator");
                 const auto item = session->Next(phase, annotator);
                 nlohmann::json body;
                 body["progress"] = ProgressJson(session->Progress(phase, annotator));
                 body["done"] = !item.has_value();
                 body["item_id"] = item ? nlohmann::json(item->item_id) : nullptr;
                 body["image_url"] = item ? nlohmann::json(item->image_url) : nullptr;
                 SendJson(res, 200, body);
               }));
    server.Get(R"(/api/images/([A-Za-z0-9_-]+))",
               Wrap([this](const httplib::Request& req, httplib::Response& res) {
                 const StudyItem* item = session->Find(req.matches[1].str());
                 if (item == nullptr) Fail(ErrorCode::kNotFound, "unknown study item");
                 res.set_content(Png(*item), "image/png");
               }));
    server.Post("/api/annotations", Wrap([this](const httplib::Request& req,
                                                httplib::Response& res) {
      nlohmann::json body;
      try {
        body = nlohmann::json::parse(req.body);
      } catch (const nlohmann::json::exception& e) {
        Fail(ErrorCode::kInvalidArgument, std::string("body is not JSON: ") + e.what());
      }
      const Annotation stored = session->Submit(Annotation::FromJson(body));
      SendJson(res, 201, stored.ToJson());
    }));
    server.Get(R"(/api/annotations/([A-Za-z0-9_-]+))",
               Wrap([this](const httplib::Request& req, httplib::Response& res) {
                 const std::string item = req.matches[1].str();
                 const std::string annotator = RequireParam(req, "annotator");
                 const AnnotationStore* store = session->store();
                 if (req.get_param_value("audit") == "1") {
                   nlohmann::json arr = nlohmann::json::array();
                   for (const auto& a : store->History(annotator, item)) arr.push_back(a.ToJson());
                   SendJson(res, 200, arr);
                   return;
                 }
                 const auto a = store->Get(annotator, item);
                 if (!a) Fail(ErrorCode::kNotFound, "no annotation for this item");
                 SendJson(res, 200, a->ToJson());
               }));
    server.Get("/api/results", Wrap([this](const httplib::Request& req, httplib::Response& res) {
      const std::string p = req.get_param_value("phase");
      const StudyPhase phase = ParsePhase(p.empty() ? "main" : p);
      const bool partial = req.get_param_value("partial") == "1";
      SendJson(res, 200, session->Results(phase, *truth, partial).ToJson());
    }));
    server.Get("/api/progress", Wrap([this](const httplib::Request& req, httplib::Response& res) {
      const std::string annotator = RequireParam(req, "annotator");
      nlohmann::json body;
      for (StudyPhase ph : {StudyPhase::kPilot, StudyPhase::kMain}) {
        nlohmann::json p = ProgressJson(session->Progress(ph, annotator));
        p["unlocked"] = session->Unlocked(ph, annotator);
        body[std::string(PhaseName(ph))] = p;
      }
      SendJson(res, 200, body);
    }));
  }
};

StudyService::StudyService(StudySession* session, const DatasetManifest* ground_truth,
                           ItemImageFn images)
    : impl_(std::make_unique<Impl>()) {
  impl_->session = session;
  impl_->truth = ground_truth;
  impl_->images = std::move(images);
  impl_->Routes();
}

StudyService::~StudyService() { Stop(); }

int StudyService::Start(const StudyServiceOptions& options) {
  if (options.static_dir && !impl_->server.set_mount_point("/", options.static_dir->string())) {
    Fail(ErrorCode::kIoError, "cannot serve static files from " + options.static_dir->string());
  }
  int port = options.port;
  if (port == 0) {
    port = impl_->server.bind_to_any_port(options.host);
  } else if (!impl_->server.bind_to_port(options.host, port)) {
    port = -1;
  }
  if (port < 0) {
    Fail(ErrorCode::kIoError, "cannot bind " + options.host + ":" + std::to_string(options.port));
  }
  std::promise<void> done;
  impl_->finished = done.get_future().share();
  {
    std::lock_guard lock(impl_->thread_mu);
    impl_->thread = std::thread([this, done = std::move(done)]() mutable {
      impl_->server.listen_after_bind();
      done.set_value();
    });
  }
  impl_->server.wait_until_ready();
  return port;
}

void StudyService::Wait() {
  std::shared_future<void> finished;
  {
    std::lock_guard lock(impl_->thread_mu);
    finished = impl_->finished;
  }
  if (finished.valid()) finished.wait();
}

void StudyService::Stop() {
  impl_->server.stop();
  std::lock_guard lock(impl_->thread_mu);
  if (impl_->thread.joinable()) impl_->thread.join();
}

}  // namespace maskaudit
