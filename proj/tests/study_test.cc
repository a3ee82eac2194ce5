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

#include <atomic>
#include <fstream>
#include <set>
#include <thread>

#include <gtest/gtest.h>
#include <httplib.h>

#include "core/error.h"
#include "core/file_util.h"
#include "core/png_io.h"
#include "study/annotation.h"
#include "study/plan.h"
#include "study/service.h"
#include "study/store.h"
#include "test_util.h"

namespace maskaudit {
namespace {

DatasetManifest Manifest(const std::vector<std::string>& classes,
                         const std::vector<std::vector<uint8_t>>& labels) {
  DatasetManifest m;
  m.class_names = classes;
  m.task = classes.size() > 1 ? TaskKind::kMultiLabel : TaskKind::kBinary;
  for (size_t i = 0; i < labels.size(); ++i) {
    Sample s;
    s.image_id = "img" + std::to_string(i);
    s.labels = labels[i];
    s.metadata.sex = "F";
    s.metadata.birth_year = 1950;
    s.metadata.projection = Projection::kAP;
    m.samples.push_back(s);
  }
  return m;
}

StrategyPredictions Preds(MaskingStrategy s, const DatasetManifest& m, uint64_t seed) {
  StrategyPredictions p;
  p.strategy = s;
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<float> u;
  for (const auto& smp : m.samples) {
    p.image_ids.push_back(smp.image_id);
    for (size_t c = 0; c < m.class_names.size(); ++c) p.probabilities.push_back(u(rng));
  }
  return p;
}

Annotation Ann(const std::string& item, std::vector<std::string> sel,
               const std::string& who = "r1") {
  Annotation a;
  a.item_id = item;
  a.selected_conditions = std::move(sel);
  a.annotator_id = who;
  a.elapsed_seconds = 4.5;
  return a;
}

const StudyItem* ItemFor(const StudyPlan& plan, MaskingStrategy s, PercentileSlot slot) {
  for (const auto& it : plan.items) {
    if (it.strategy == s && it.basis->slot == slot) return &it;
  }
  return nullptr;
}

TEST(PlanTest, ThreeImagesFillAllSlots) {
  const DatasetManifest m = Manifest({"c"}, {{0}, {1}, {1}});
  StrategyPredictions p{MaskingStrategy::kNoRoi, {"img0", "img1", "img2"}, {0.5f, 0.9f, 0.1f}};
  const StudyPlan plan = SelectStudyImages(std::span(&p, 1), m, 1);
  ASSERT_EQ(plan.items.size(), 3u);
  EXPECT_EQ(ItemFor(plan, MaskingStrategy::kNoRoi, PercentileSlot::kLow)->image_id, "img2");
  EXPECT_EQ(ItemFor(plan, MaskingStrategy::kNoRoi, PercentileSlot::kMedian)->image_id, "img0");
  EXPECT_EQ(ItemFor(plan, MaskingStrategy::kNoRoi, PercentileSlot::kHigh)->image_id, "img1");
  EXPECT_FLOAT_EQ(ItemFor(plan, MaskingStrategy::kNoRoi, PercentileSlot::kHigh)->basis->probability,
                  0.9f);
}

TEST(PlanTest, EvenCountTakesLowerMiddleAndTiesUseIds) {
  const DatasetManifest m = Manifest({"c"}, {{0}, {1}, {1}, {0}});
  StrategyPredictions p{MaskingStrategy::kFull,
                        {"img3", "img1", "img0", "img2"},
                        {0.9f, 0.2f, 0.1f, 0.8f}};
  const StudyPlan plan = SelectStudyImages(std::span(&p, 1), m, 1);
  EXPECT_EQ(ItemFor(plan, MaskingStrategy::kFull, PercentileSlot::kMedian)->image_id, "img1");

  StrategyPredictions tied{MaskingStrategy::kFull,
                           {"img3", "img1", "img0", "img2"},
                           {0.5f, 0.5f, 0.5f, 0.5f}};
  const StudyPlan t = SelectStudyImages(std::span(&tied, 1), m, 1);
  EXPECT_EQ(ItemFor(t, MaskingStrategy::kFull, PercentileSlot::kHigh)->image_id, "img0");
  EXPECT_EQ(ItemFor(t, MaskingStrategy::kFull, PercentileSlot::kMedian)->image_id, "img1");
  EXPECT_EQ(ItemFor(t, MaskingStrategy::kFull, PercentileSlot::kLow)->image_id, "img0");
}

TEST(PlanTest, FiveByFiveByThreeIsSeventyFiveAndDeterministic) {
  std::vector<std::vector<uint8_t>> labels(40, std::vector<uint8_t>(5, 0));
  for (size_t i = 0; i < labels.size(); ++i) labels[i][i % 5] = 1;
  const DatasetManifest m = Manifest({"a", "b", "c", "d", "e"}, labels);
  std::vector<StrategyPredictions> preds;
  for (MaskingStrategy s : kAllStrategies) preds.push_back(Preds(s, m, 10 + static_cast<int>(s)));
  const StudyPlan plan = SelectStudyImages(preds, m, 77);
  EXPECT_EQ(plan.items.size(), 75u);
  std::set<std::string> ids;
  std::map<std::pair<std::string, MaskingStrategy>, int> per_cell;
  for (const auto& it : plan.items) {
    ids.insert(it.item_id);
    ++per_cell[{it.basis->condition, it.strategy}];
    EXPECT_EQ(it.image_url, "/api/images/" + it.item_id);
  }
  EXPECT_EQ(ids.size(), 75u);
  EXPECT_EQ(per_cell.size(), 25u);
  for (const auto& [cell, n] : per_cell) EXPECT_EQ(n, 3);

  EXPECT_EQ(SelectStudyImages(preds, m, 77), plan);
  const StudyPlan other = SelectStudyImages(preds, m, 78);
  EXPECT_NE(other.items, plan.items);
  EXPECT_EQ(StudyPlan::FromJson(plan.ToJson()), plan);
}

TEST(PlanTest, Rejections) {
  const DatasetManifest m = Manifest({"c"}, {{0}, {1}});
  StrategyPredictions two{MaskingStrategy::kFull, {"img0", "img1"}, {0.1f, 0.2f}};
  try {
    SelectStudyImages(std::span(&two, 1), m, 0);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kInsufficientImages);
  }
  const DatasetManifest m3 = Manifest({"c"}, {{0}, {1}, {1}});
  std::vector<StrategyPredictions> mismatched = {
      {MaskingStrategy::kFull, {"img0", "img1", "img2"}, {0.1f, 0.2f, 0.3f}},
      {MaskingStrategy::kNoRoi, {"img0", "img1"}, {0.1f, 0.2f}}};
  EXPECT_THROW(SelectStudyImages(mismatched, m3, 0), Error);
  EXPECT_THROW(SelectStudyImages(std::span(mismatched.data(), 1), m3, 0, 4), Error);
}

TEST(PlanTest, PilotDrawsTenDistinctImages) {
  const DatasetManifest m = Manifest({"c"}, std::vector<std::vector<uint8_t>>(30, {0}));
  std::vector<std::string> pool;
  for (const auto& s : m.samples) pool.push_back(s.image_id);
  const StudyPlan p = SelectPilotImages(pool, m, 5);
  EXPECT_EQ(p.phase, StudyPhase::kPilot);
  ASSERT_EQ(p.items.size(), 10u);
  std::set<std::string> images;
  for (const auto& it : p.items) {
    images.insert(it.image_id);
    EXPECT_FALSE(it.basis.has_value());
  }
  EXPECT_EQ(images.size(), 10u);
  EXPECT_EQ(SelectPilotImages(pool, m, 5), p);
  EXPECT_THROW(SelectPilotImages(std::span(pool.data(), 9), m, 5), Error);
}

TEST(AgreementTest, NoneEverywhereFindsNothing) {
  // 35 present cases spread over 35 single-label images.
  std::vector<std::vector<uint8_t>> labels(35, std::vector<uint8_t>(5, 0));
  for (size_t i = 0; i < labels.size(); ++i) labels[i][i % 5] = 1;
  const DatasetManifest m = Manifest({"a", "b", "c", "d", "e"}, labels);
  StudyPlan plan;
  plan.class_names = m.class_names;
  std::vector<Annotation> anns;
  std::vector<Annotation> perfect;
  for (size_t i = 0; i < labels.size(); ++i) {
    StudyItem it;
    it.item_id = "m-" + std::to_string(i);
    it.image_id = m.samples[i].image_id;
    it.strategy = MaskingStrategy::kNoRoi;
    plan.items.push_back(it);
    anns.push_back(Ann(it.item_id, {"none"}));
    perfect.push_back(Ann(it.item_id, {m.class_names[i % 5]}));
  }
  const AgreementReport r = ComputeAgreement(plan, anns, m);
  const StrategyAgreement& s = r.strategy(MaskingStrategy::kNoRoi);
  EXPECT_EQ(s.present, 35);
  EXPECT_EQ(s.found, 0);
  const AgreementReport p = ComputeAgreement(plan, perfect, m);
  for (const auto& c : p.strategy(MaskingStrategy::kNoRoi).conditions) {
    EXPECT_EQ(c.sensitivity(), 1.0);
    EXPECT_EQ(c.false_positives, 0);
  }
  // Missing reads need the partial flag.
  anns.pop_back();
  EXPECT_THROW(ComputeAgreement(plan, anns, m), Error);
  EXPECT_TRUE(ComputeAgreement(plan, anns, m, true).partial);
}

TEST(AgreementTest, MatchesHandBuiltContingencyTable) {
  const DatasetManifest m = Manifest({"A", "B"}, {{0, 0}, {1, 0}, {1, 1}, {0, 0}});
  StudyPlan plan;
  plan.class_names = {"A", "B"};
  const auto item = [](std::string id, std::string img, MaskingStrategy s, std::string cond,
                       PercentileSlot slot, double p) {
    return StudyItem{id, img, s, "", SelectionBasis{cond, slot, p}};
  };
  plan.items = {item("i1", "img1", MaskingStrategy::kNoRoi, "A", PercentileSlot::kHigh, 0.9),
                item("i2", "img2", MaskingStrategy::kNoRoi, "B", PercentileSlot::kLow, 0.1),
                item("i3", "img3", MaskingStrategy::kOnlyRoi, "A", PercentileSlot::kMedian, 0.4),
                item("i4", "img1", MaskingStrategy::kOnlyRoi, "A", PercentileSlot::kLow, 0.2)};
  const std::vector<Annotation> anns = {Ann("i1", {"A"}), Ann("i2", {"none"}),
                                        Ann("i3", {"B"}), Ann("i4", {"A", "B"}),
                                        Ann("unknown", {"A"})};
  const AgreementReport r = ComputeAgreement(plan, anns, m);

  // Worked by hand from the table above.
  AgreementReport want;
  want.phase = StudyPhase::kMain;
  want.reads = 4;
  want.items_total = 4;
  want.items_read = 4;
  want.strategies = {
      {MaskingStrategy::kNoRoi,
       {{"A", 2, 1, 0, 0, 1, 1}, {"B", 1, 0, 0, 1, 1, 1}},
       3,
       1},
      {MaskingStrategy::kOnlyRoi,
       {{"A", 1, 1, 0, 1, 2, 1}, {"B", 0, 0, 2, 2, 0, 0}},
       1,
       1}};
  EXPECT_EQ(r, want);
  EXPECT_FALSE(r.strategy(MaskingStrategy::kOnlyRoi).conditions[1].sensitivity().has_value());
  EXPECT_TRUE(r.ToJson()["strategies"][1]["conditions"][1]["sensitivity"].is_null());
}

TEST(AnnotationTest, Normalization) {
  const std::vector<std::string> classes = {"A", "B"};
  Annotation a = Ann("x", {"B", "A", "B"});
  NormalizeAnnotation(&a, classes);
  EXPECT_EQ(a.selected_conditions, (std::vector<std::string>{"A", "B"}));
  Annotation none = Ann("x", {"none", "A"});
  EXPECT_THROW(NormalizeAnnotation(&none, classes), Error);
  Annotation empty = Ann("x", {});
  EXPECT_THROW(NormalizeAnnotation(&empty, classes), Error);
  Annotation bad = Ann("x", {"C"});
  EXPECT_THROW(NormalizeAnnotation(&bad, classes), Error);
  Annotation other = Ann("x", {"other"});
  EXPECT_NO_THROW(NormalizeAnnotation(&other, classes));
}

struct Fixture {
  DatasetManifest manifest;
  StudyPlan pilot;
  StudyPlan main;

  Fixture() {
    std::vector<std::vector<uint8_t>> labels(20, std::vector<uint8_t>(2, 0));
    for (size_t i = 0; i < labels.size(); ++i) labels[i][i % 2] = 1;
    manifest = Manifest({"A", "B"}, labels);
    std::vector<std::string> pool;
    for (const auto& s : manifest.samples) pool.push_back(s.image_id);
    pilot = SelectPilotImages(pool, manifest, 3);
    std::vector<StrategyPredictions> preds;
    for (MaskingStrategy s : kAllStrategies) preds.push_back(Preds(s, manifest, 1));
    main = SelectStudyImages(preds, manifest, 9);
  }
};

std::string Counter() {
  static std::atomic<int> n{0};
  return "t" + std::to_string(n++);
}

TEST(StoreTest, RoundTripAuditAndReplay) {
  testing_util::TempDir dir("store");
  const auto log = dir.path() / "annotations.jsonl";
  Annotation first;
  {
    AnnotationStore store(log, Counter);
    first = store.Append(StudyPhase::kMain, Ann("m-001", {"A"}));
    EXPECT_EQ(store.Get("r1", "m-001"), first);
    const Annotation second = store.Append(StudyPhase::kMain, Ann("m-001", {"B"}));
    EXPECT_EQ(store.Get("r1", "m-001"), second);
    EXPECT_EQ(store.History("r1", "m-001").size(), 2u);
    store.ClosePhase(StudyPhase::kPilot);
  }
  // Torn tail from an interrupted write.
  { std::ofstream(log, std::ios::app) << "{\"type\":\"annot"; }
  AnnotationStore reopened(log, Counter);
  const auto h = reopened.History("r1", "m-001");
  ASSERT_EQ(h.size(), 2u);
  EXPECT_EQ(h[0], first);
  EXPECT_EQ(h[1].selected_conditions, std::vector<std::string>{"B"});
  EXPECT_TRUE(reopened.IsClosed(StudyPhase::kPilot));
  EXPECT_EQ(reopened.Current(StudyPhase::kMain).size(), 1u);
  try {
    reopened.Append(StudyPhase::kPilot, Ann("p-001", {"A"}));
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kPhaseClosed);
  }
  reopened.Append(StudyPhase::kMain, Ann("m-002", {"A"}));
  AnnotationStore again(log, Counter);
  EXPECT_TRUE(again.Get("r1", "m-002").has_value());
}

TEST(SessionTest, RoutingLockingAndErrors) {
  testing_util::TempDir dir("session");
  Fixture f;
  AnnotationStore store(dir.path() / "log.jsonl");
  StudySession s(f.pilot, f.main, &store);
  try {
    s.Submit(Ann("nope", {"A"}));
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kNotFound);
  }
  const std::string main_item = f.main.items[0].item_id;
  try {
    s.Submit(Ann(main_item, {"A"}));
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kPhaseClosed);  // pilot not done
  }
  for (const auto& it : f.pilot.items) s.Submit(Ann(it.item_id, {"none"}));
  EXPECT_EQ(s.Progress(StudyPhase::kPilot, "r1").done, 10);
  EXPECT_FALSE(s.Next(StudyPhase::kPilot, "r1").has_value());
  EXPECT_EQ(s.Next(StudyPhase::kMain, "r1")->item_id, main_item);
  s.Submit(Ann(main_item, {"A"}));
  EXPECT_EQ(s.Next(StudyPhase::kMain, "r1")->item_id, f.main.items[1].item_id);
  store.ClosePhase(StudyPhase::kMain);
  EXPECT_THROW(s.Submit(Ann(f.main.items[1].item_id, {"A"})), Error);
}

TEST(SessionTest, ConcurrentSubmissionsAllPersist) {
  testing_util::TempDir dir("concurrent");
  Fixture f;
  const auto log = dir.path() / "log.jsonl";
  {
    AnnotationStore store(log);
    StudySession s(std::nullopt, f.main, &store);
    std::vector<std::thread> threads;
    for (int t = 0; t < 8; ++t) {
      threads.emplace_back([&, t] {
        for (size_t i = t; i < f.main.items.size(); i += 8) {
          s.Submit(Ann(f.main.items[i].item_id, {"A"}, "r" + std::to_string(t % 2)));
        }
      });
    }
    for (auto& th : threads) th.join();
  }
  AnnotationStore reread(log);
  EXPECT_EQ(reread.Current(StudyPhase::kMain).size(), f.main.items.size());
}

Image ItemImage(const StudyItem& item) {
  Image im(1, 8, 8);
  for (size_t i = 0; i < im.data.size(); ++i) {
    im.data[i] = static_cast<float>((i * 7 + item.item_id.size()) % 16) / 15.0f;
  }
  return im;
}

// Keys a reader-facing response must never carry.
void ExpectNoSideChannel(const nlohmann::json& j) {
  static const std::set<std::string> kBanned = {"projection", "sex",       "age",
                                               "birth_year", "strategy",  "condition",
                                               "basis",      "image_id",  "probability",
                                               "patient_id", "slot"};
  if (j.is_object()) {
    for (const auto& [k, v] : j.items()) {
      EXPECT_EQ(kBanned.count(k), 0u) << k;
      ExpectNoSideChannel(v);
    }
  } else if (j.is_array()) {
    for (const auto& v : j) ExpectNoSideChannel(v);
  }
}

TEST(ServiceTest, HttpPilotThenMain) {
  testing_util::TempDir dir("http");
  Fixture f;
  AnnotationStore store(dir.path() / "log.jsonl");
  StudySession session(f.pilot, f.main, &store);
  StudyService service(&session, &f.manifest, ItemImage);
  const int port = service.Start({});
  httplib::Client cli("127.0.0.1", port);

  auto get = [&](const std::string& path) {
    auto res = cli.Get(path);
    EXPECT_TRUE(res);
    return res;
  };
  auto classes = get("/api/classes");
  EXPECT_EQ(nlohmann::json::parse(classes->body)["class_names"],
            nlohmann::json({"A", "B"}));

  EXPECT_EQ(get("/api/study/main/next?annotator=ann")->status, 409);
  EXPECT_EQ(get("/api/study/pilot/next")->status, 400);
  EXPECT_EQ(get("/api/study/bogus/next?annotator=ann")->status, 400);
  EXPECT_EQ(get("/api/images/zzz")->status, 404);

  for (int i = 0; i < 10; ++i) {
    auto next = get("/api/study/pilot/next?annotator=ann");
    ASSERT_EQ(next->status, 200);
    const auto nj = nlohmann::json::parse(next->body);
    ExpectNoSideChannel(nj);
    EXPECT_EQ(nj["progress"]["done"], i);
    const std::string item = nj["item_id"];
    auto png = get(nj["image_url"].get<std::string>());
    ASSERT_EQ(png->status, 200);
    EXPECT_EQ(png->get_header_value("Content-Type"), "image/png");
    const std::vector<uint8_t> bytes(png->body.begin(), png->body.end());
    EXPECT_EQ(bytes, EncodePngImage(ItemImage(*session.Find(item))));

    const nlohmann::json body = {{"item_id", item},
                                 {"selected_conditions", {"none"}},
                                 {"comment", "clear"},
                                 {"annotator_id", "ann"},
                                 {"elapsed_seconds", 3.25}};
    auto post = cli.Post("/api/annotations", body.dump(), "application/json");
    ASSERT_TRUE(post);
    ASSERT_EQ(post->status, 201);
    const auto stored = nlohmann::json::parse(post->body);
    ExpectNoSideChannel(stored);
    auto fetched = get("/api/annotations/" + item + "?annotator=ann");
    EXPECT_EQ(nlohmann::json::parse(fetched->body), stored);
  }
  auto progress = nlohmann::json::parse(get("/api/progress?annotator=ann")->body);
  ExpectNoSideChannel(progress);
  EXPECT_EQ(progress["pilot"]["done"], 10);
  EXPECT_EQ(progress["pilot"]["total"], 10);
  EXPECT_EQ(progress["main"]["unlocked"], true);

  // Resubmission keeps an audit trail.
  const std::string first_main =
      nlohmann::json::parse(get("/api/study/main/next?annotator=ann")->body)["item_id"];
  for (const char* sel : {"A", "B"}) {
    const nlohmann::json body = {{"item_id", first_main},
                                 {"selected_conditions", {sel}},
                                 {"annotator_id", "ann"}};
    EXPECT_EQ(cli.Post("/api/annotations", body.dump(), "application/json")->status, 201);
  }
  auto audit = nlohmann::json::parse(
      get("/api/annotations/" + first_main + "?annotator=ann&audit=1")->body);
  EXPECT_EQ(audit.size(), 2u);
  EXPECT_EQ(audit[1]["selected_conditions"], nlohmann::json({"B"}));

  EXPECT_EQ(cli.Post("/api/annotations", "{bad", "application/json")->status, 400);
  const nlohmann::json unknown = {{"item_id", "m-999"},
                                  {"selected_conditions", {"A"}},
                                  {"annotator_id", "ann"}};
  EXPECT_EQ(cli.Post("/api/annotations", unknown.dump(), "application/json")->status, 404);

  EXPECT_EQ(get("/api/results?phase=main")->status, 409);
  auto partial = get("/api/results?phase=main&partial=1");
  ASSERT_EQ(partial->status, 200);
  EXPECT_EQ(nlohmann::json::parse(partial->body)["reads"], 1);
  service.Stop();
}

}  // namespace
}  // namespace maskaudit
