#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <attn/attn.h>

#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iterator>
#include <string>
#include <vector>

namespace fs = std::filesystem;

namespace {

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

fs::path scratch(const std::string& name) {
  const fs::path p = fs::temp_directory_path() / ("attn_capi_" + name);
  fs::remove_all(p);
  fs::create_directories(p);
  return p;
}

attn_config* small_config() {
  const char* text = R"({"gen": {"image_size": 32, "counts": {"real": 24, "partial_fake": 24, "entire_fake": 24}},
    "model": {"image_size": 32}, "train": {"epochs": 1, "batch": 8}})";
  attn_config* cfg = nullptr;
  REQUIRE(attn_config_parse(text, &cfg) == ATTN_OK);
  return cfg;
}

}  // namespace

TEST_CASE("status codes and messages") {
  attn_config* cfg = nullptr;
  CHECK(attn_config_parse("{oops", &cfg) == ATTN_ERR_USAGE);
  CHECK(cfg == nullptr);
  CHECK(std::string(attn_last_error()).find("malformed") != std::string::npos);
  CHECK(attn_config_load("/nonexistent/cfg.json", &cfg) == ATTN_ERR_IO);
  CHECK(attn_config_parse(nullptr, &cfg) == ATTN_ERR_USAGE);
  CHECK(attn_config_default(&cfg) == ATTN_OK);
  CHECK(std::string(attn_last_error()).empty());

  int map_size = 0;
  CHECK(attn_config_map_size(cfg, &map_size) == ATTN_OK);
  CHECK(map_size == 8);
  char* json = nullptr;
  REQUIRE(attn_config_to_json(cfg, &json) == ATTN_OK);
  CHECK(std::string(json).find("\"insertion_stage\": 3") != std::string::npos);
  attn_string_free(json);

  attn_model* model = nullptr;
  CHECK(attn_model_load("/nonexistent/model.atnt", &model) == ATTN_ERR_IO);
  attn_config_free(cfg);

  attn_config* mam = nullptr;
  REQUIRE(attn_config_parse(R"({"model": {"variant": "mam"}})", &mam) == ATTN_OK);
  CHECK(attn_model_create(mam, nullptr, &model) == ATTN_ERR_USAGE);
  attn_config_free(mam);
  CHECK(attn_version() != nullptr);
}

TEST_CASE("metric entry points") {
  const uint8_t gt[4] = {1, 0, 0, 0}, pred[4] = {0, 1, 0, 0}, none[4] = {0, 0, 0, 0};
  double v = -1.0;
  int defined = -1;
  CHECK(attn_iinc(pred, gt, 4, &v) == ATTN_OK);
  CHECK(v == doctest::Approx(0.8));
  CHECK(attn_iou(none, none, 4, &v, &defined) == ATTN_OK);
  CHECK(defined == 0);
  CHECK(attn_pbca(pred, gt, 4, &v) == ATTN_OK);
  CHECK(v == 0.5);
  const uint8_t bad[4] = {0, 3, 0, 0};
  CHECK(attn_pbca(bad, gt, 4, &v) == ATTN_ERR_USAGE);

  const float a[4] = {1, 1, 0, 0}, b[4] = {1, 0, 0, 0};
  CHECK(attn_cosine(a, b, 4, &v, &defined) == ATTN_OK);
  CHECK(defined == 1);
  CHECK(v == doctest::Approx(1.0 / std::sqrt(2.0)));

  const double scores[4] = {0.4, 0.6, 0.5, 0.7};
  const int labels[4] = {0, 0, 1, 1};
  double auc = 0.0, eer = 0.0;
  CHECK(attn_detection_metrics(scores, labels, 4, &auc, &eer, nullptr, nullptr) == ATTN_OK);
  CHECK(auc == doctest::Approx(0.75));
  const int one_class[4] = {0, 0, 0, 0};
  CHECK(attn_detection_metrics(scores, one_class, 4, &auc, nullptr, nullptr, nullptr) == ATTN_ERR_USAGE);

  uint8_t src[12] = {0}, fake[12] = {0}, mask[4] = {9, 9, 9, 9};
  fake[3] = fake[4] = fake[5] = 255;
  CHECK(attn_derive_gt_mask(src, fake, 2, 2, 0.1, mask) == ATTN_OK);
  CHECK(mask[0] == 0);
  CHECK(mask[1] == 1);
  CHECK(mask[2] + mask[3] == 0);
}

TEST_CASE("generate, fit, train, evaluate through the C API") {
  const fs::path dir = scratch("pipeline");
  attn_config* cfg = small_config();
  size_t records = 0;
  REQUIRE(attn_gen_dataset(cfg, (dir / "data").c_str(), &records) == ATTN_OK);
  CHECK(records == 72);
  const std::string manifest = (dir / "data" / "manifest.jsonl").string();

  const std::string basis = (dir / "basis.atnt").string();
  CHECK(attn_fit_mam(manifest.c_str(), 0, 100, 4, 7, basis.c_str()) == ATTN_ERR_USAGE);
  CHECK(attn_fit_mam(manifest.c_str(), 4, 100, 4, 7, basis.c_str()) == ATTN_OK);
  CHECK(attn_fit_mam(manifest.c_str(), 40, 100, 4, 7, basis.c_str()) == ATTN_ERR_USAGE);

  attn_model* model = nullptr;
  REQUIRE(attn_model_create(cfg, nullptr, &model) == ATTN_OK);
  attn_model_info info{};
  REQUIRE(attn_model_info_get(model, &info) == ATTN_OK);
  CHECK(info.parameter_count == 60707u);
  CHECK(info.map_size == 4);
  CHECK(std::string(info.variant) == "regression");
  CHECK(info.step == 0);

  const std::string history = (dir / "history.csv").string();
  REQUIRE(attn_model_train(model, manifest.c_str(), history.c_str()) == ATTN_OK);
  CHECK(slurp(history).rfind("epoch,", 0) == 0);
  REQUIRE(attn_model_info_get(model, &info) == ATTN_OK);
  CHECK(info.step > 0);

  std::vector<float> images(2 * 32 * 32 * 3, 0.5f);
  double scores[2] = {-1, -1};
  std::vector<float> maps(2 * 16, -1.0f);
  REQUIRE(attn_model_forward(model, images.data(), 2, scores, maps.data()) == ATTN_OK);
  CHECK(scores[0] >= 0.0);
  CHECK(scores[0] <= 1.0);
  CHECK(scores[0] == scores[1]);
  for (float m : maps) CHECK((m >= 0.0f && m <= 1.0f));

  const std::string ckpt = (dir / "model.atnt").string();
  REQUIRE(attn_model_save(model, ckpt.c_str()) == ATTN_OK);
  attn_model* loaded = nullptr;
  REQUIRE(attn_model_load(ckpt.c_str(), &loaded) == ATTN_OK);
  double again[2] = {0, 0};
  REQUIRE(attn_model_forward(loaded, images.data(), 2, again, nullptr) == ATTN_OK);
  CHECK(again[0] == scores[0]);

  const std::string report = (dir / "report.json").string();
  const std::string roc = (dir / "report.roc.csv").string();
  REQUIRE(attn_model_evaluate(loaded, manifest.c_str(), "test", 0.1, report.c_str(), roc.c_str(),
                              (dir / "maps").c_str()) == ATTN_OK);
  CHECK(slurp(report).find("\"mean_iinc\"") != std::string::npos);
  CHECK(slurp(roc).rfind("fdr,tdr\n", 0) == 0);
  CHECK(attn_model_evaluate(loaded, manifest.c_str(), "holdout", 0.1, report.c_str(), nullptr, nullptr) ==
        ATTN_ERR_USAGE);

  const std::string scored = (dir / "scores.json").string();
  REQUIRE(attn_score_maps((dir / "maps").c_str(), (dir / "maps").c_str(), 0.1, scored.c_str()) == ATTN_OK);
  CHECK(slurp(scored).find("\"mean_iinc\": 0.0") != std::string::npos);

  attn_model_free(loaded);
  attn_model_free(model);

  // mam variant needs the basis file
  attn_config* mam = nullptr;
  REQUIRE(attn_config_parse(R"({"gen": {"image_size": 32}, "model": {"image_size": 32, "variant": "mam"}})", &mam) ==
          ATTN_OK);
  attn_model* m2 = nullptr;
  REQUIRE(attn_model_create(mam, basis.c_str(), &m2) == ATTN_OK);
  CHECK(attn_model_forward(m2, images.data(), 2, scores, maps.data()) == ATTN_OK);
  attn_model_free(m2);
  attn_config_free(mam);

  attn_config_free(cfg);
}
