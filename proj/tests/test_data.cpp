#include <doctest.h>

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <set>

#include "ocda/data.hpp"
#include "ocda/serialize.hpp"
#include "testutil.hpp"

using namespace ocda;
using namespace ocda::test;

namespace {

std::string tmp_path(const std::string& name) {
  return (std::filesystem::temp_directory_path() / name).string();
}

std::vector<LabeledExample> tiny_gray_examples(int count, std::uint64_t seed) {
  Rng rng = Rng::stream(seed, "tiny-gray");
  std::vector<LabeledExample> out;
  for (int i = 0; i < count; ++i) {
    LabeledExample ex;
    ex.label = i % 10;
    ex.features.resize(28 * 28);
    for (auto& v : ex.features) {
      v = rng.uniform() < 0.8 ? 0.0f : static_cast<float>(rng.uniform(0.2, 1.0));
    }
    out.push_back(std::move(ex));
  }
  return out;
}

}  // namespace

TEST_CASE("idx round-trip and byte scaling") {
  const auto examples = tiny_gray_examples(20, 1);
  const std::string img = tmp_path("t_idx_images");
  const std::string lab = tmp_path("t_idx_labels");
  write_idx(img, lab, examples, 28, 28);
  const auto back = load_idx(img, lab);
  REQUIRE(back.size() == 20);
  for (int i = 0; i < 20; ++i) {
    CHECK(back[i].label == examples[i].label);
    CHECK(back[i].features.size() == 784);
  }

  // Endpoint scaling: a crafted image with bytes 0 and 255.
  std::vector<LabeledExample> crafted(1);
  crafted[0].label = 7;
  crafted[0].features.assign(784, 0.0f);
  crafted[0].features[0] = 1.0f;
  write_idx(img, lab, crafted, 28, 28);
  const auto scaled = load_idx(img, lab);
  CHECK(scaled[0].features[0] == 1.0f);
  CHECK(scaled[0].features[1] == 0.0f);
}

TEST_CASE("idx rejects bad magic, count mismatch, truncation") {
  const std::string img = tmp_path("t_idx_bad_images");
  const std::string lab = tmp_path("t_idx_bad_labels");
  write_idx(img, lab, tiny_gray_examples(5, 2), 28, 28);

  {
    std::fstream f(img, std::ios::in | std::ios::out | std::ios::binary);
    f.seekp(0);
    const char zeros[4] = {0, 0, 0, 0};
    f.write(zeros, 4);
  }
  CHECK_THROWS_AS(load_idx(img, lab), FormatError);

  write_idx(img, lab, tiny_gray_examples(5, 2), 28, 28);
  {
    // Rewrite the label count field to disagree.
    std::fstream f(lab, std::ios::in | std::ios::out | std::ios::binary);
    f.seekp(4);
    const unsigned char three[4] = {0, 0, 0, 3};
    f.write(reinterpret_cast<const char*>(three), 4);
  }
  CHECK_THROWS_AS(load_idx(img, lab), FormatError);

  write_idx(img, lab, tiny_gray_examples(5, 2), 28, 28);
  std::filesystem::resize_file(img, 16 + 784 * 3);  // drop two examples
  CHECK_THROWS_AS(load_idx(img, lab), IoError);
}

TEST_CASE("digit corpus is deterministic, balanced and idx-shaped") {
  const std::string img = tmp_path("t_digits_images");
  const std::string lab = tmp_path("t_digits_labels");
  render_digit_corpus(img, lab, 500, 42);
  const auto a = load_idx(img, lab);
  REQUIRE(a.size() == 500);
  std::map<int, int> counts;
  double on_pixels = 0.0;
  for (const auto& ex : a) {
    counts[ex.label] += 1;
    for (float v : ex.features) on_pixels += v > 0.5f ? 1 : 0;
  }
  for (const auto& [label, count] : counts) CHECK(count == 50);
  // Strokes cover a sane fraction of the canvas.
  const double mean_on = on_pixels / 500.0;
  CHECK(mean_on > 20.0);
  CHECK(mean_on < 300.0);

  render_digit_corpus(img, lab, 500, 42);
  const auto b = load_idx(img, lab);
  for (int i = 0; i < 500; ++i) {
    CHECK(a[i].label == b[i].label);
    CHECK(a[i].features == b[i].features);
  }
}

TEST_CASE("rainbow descriptors enumerate the 7x4x2 product") {
  const auto descs = rainbow_descriptors();
  REQUIRE(descs.size() == 56);
  std::set<std::string> distinct;
  for (const auto& d : descs) distinct.insert(d.to_string());
  CHECK(distinct.size() == 56);
}

TEST_CASE("rainbow transform: identity path keeps digit geometry") {
  const auto src = tiny_gray_examples(1, 3)[0];
  DomainDescriptor d;
  d.kind = DomainDescriptor::Kind::Rainbow;
  d.rainbow = {"red", 0, "full"};
  const auto out = rainbow_transform(src, d);
  REQUIRE(out.features.size() == 3 * 784);
  for (int i = 0; i < 784; ++i) {
    const float g = src.features[i];
    if (g < 0.1f) {
      CHECK(out.features[784 + i] == 0.0f);  // green channel: background
    } else {
      CHECK(out.features[784 + i] == doctest::Approx(g).epsilon(1e-6));
    }
    CHECK(out.features[i] >= g);  // red channel saturates toward the background
  }
}

TEST_CASE("four quarter turns are the identity") {
  const auto src = tiny_gray_examples(1, 4)[0];
  DomainDescriptor d0;
  d0.kind = DomainDescriptor::Kind::Rainbow;
  d0.rainbow = {"red", 0, "full"};
  DomainDescriptor d90 = d0;
  d90.rainbow.rotation = 90;

  // Compose the 90-degree transform four times on the grayscale source by
  // reading back the green channel (identity colorization for g >= 0.1 there
  // does not hold behind the background threshold, so rotate a thresholded
  // copy instead).
  LabeledExample cur = src;
  for (auto& v : cur.features) {
    if (v < 0.1f) v = 0.0f;  // the background threshold erases sub-0.1 detail
  }
  const LabeledExample reference = cur;
  for (int turn = 0; turn < 4; ++turn) {
    const auto rotated = rainbow_transform(cur, d90);
    for (int i = 0; i < 784; ++i) cur.features[i] = rotated.features[784 + i];
  }
  CHECK(cur.features == reference.features);

  const auto direct = rainbow_transform(reference, d0);
  const auto once = rainbow_transform(reference, d90);
  CHECK(direct.features != once.features);
}

TEST_CASE("half scale centers a 14x14 reduction on a black canvas") {
  LabeledExample src;
  src.label = 0;
  src.features.assign(784, 1.0f);  // all-bright source
  DomainDescriptor d;
  d.kind = DomainDescriptor::Kind::Rainbow;
  d.rainbow = {"blue", 0, "half"};
  const auto out = rainbow_transform(src, d);
  // Green channel: center block stays bright, border is background (0).
  CHECK(out.features[784 + 14 * 28 + 14] == 1.0f);
  CHECK(out.features[784 + 0 * 28 + 0] == 0.0f);
  CHECK(out.features[784 + 3 * 28 + 14] == 0.0f);
}

TEST_CASE("rainbow domain construction at full size") {
  const std::string img = tmp_path("t_rb_images");
  const std::string lab = tmp_path("t_rb_labels");
  render_digit_corpus(img, lab, 56000, 7);
  const auto examples = load_idx(img, lab);
  const auto domains = build_rainbow_domains(examples, 11);
  REQUIRE(domains.size() == 56);
  std::size_t total = 0;
  for (const auto& d : domains) {
    CHECK(d->size() == 1000);
    CHECK(d->feature_shape == Shape{3, 28, 28});
    for (const auto& [label, count] : d->class_counts) CHECK(count == 100);
    total += d->size();
  }
  CHECK(total == 56000);

  CHECK_THROWS_AS(build_rainbow_domains(tiny_gray_examples(100, 1), 0), InsufficientData);
}

TEST_CASE("pump generator: shapes, nonnegativity, domain shift, shared envelope") {
  const SpectrumConfig cfg = default_pump_config();
  const auto domains = generate_pump_domains(cfg, 32, 12, 5);
  REQUIRE(domains.size() == 32);
  for (const auto& d : domains) {
    CHECK(d->size() == 60);
    CHECK(d->feature_shape == Shape{1, 256});
    for (const auto& [label, count] : d->class_counts) CHECK(count == 12);
    for (const auto& ex : d->examples) {
      for (float v : ex.features) CHECK(v >= 0.0f);
    }
  }

  // Mean spectra of the same class differ across domains well above the
  // noise floor.
  auto class_mean = [](const DomainDataset& d, int label) {
    std::vector<double> mean(256, 0.0);
    int n = 0;
    for (const auto& ex : d.examples) {
      if (ex.label != label) continue;
      for (int i = 0; i < 256; ++i) mean[i] += ex.features[i];
      ++n;
    }
    for (auto& v : mean) v /= n;
    return mean;
  };
  const auto m0 = class_mean(*domains[0], 0);
  const auto m9 = class_mean(*domains[9], 0);
  double dist2 = 0.0;
  for (int i = 0; i < 256; ++i) dist2 += (m0[i] - m9[i]) * (m0[i] - m9[i]);
  CHECK(std::sqrt(dist2) > 1.0);

  // Anomalous classes follow the domain's base pattern: log-envelope
  // correlation between the normal mean and each anomalous mean stays high.
  for (int domain_idx : {0, 7, 21}) {
    const auto normal = class_mean(*domains[domain_idx], 0);
    for (int label = 2; label < 5; ++label) {
      const auto anom = class_mean(*domains[domain_idx], label);
      std::vector<double> ln(256), la(256);
      double mean_ln = 0.0, mean_la = 0.0;
      for (int i = 0; i < 256; ++i) {
        ln[i] = std::log(normal[i] + 1e-6);
        la[i] = std::log(anom[i] + 1e-6);
        mean_ln += ln[i] / 256.0;
        mean_la += la[i] / 256.0;
      }
      double cov = 0.0, vn = 0.0, va = 0.0;
      for (int i = 0; i < 256; ++i) {
        cov += (ln[i] - mean_ln) * (la[i] - mean_la);
        vn += (ln[i] - mean_ln) * (ln[i] - mean_ln);
        va += (la[i] - mean_la) * (la[i] - mean_la);
      }
      CHECK(cov / std::sqrt(vn * va) > 0.7);
    }
  }
}

TEST_CASE("pump generator degenerate config reproduces the base envelope") {
  SpectrumConfig cfg = default_pump_config();
  cfg.noise_scale = 0.0;
  for (auto& ce : cfg.class_effects) {
    ce.mod_gain = 0.0;
    ce.peaks.clear();
  }
  const auto domains = generate_pump_domains(cfg, 2, 4, 9);
  for (const auto& d : domains) {
    const auto& first = d->examples.front().features;
    for (const auto& ex : d->examples) CHECK(ex.features == first);
  }
  CHECK(domains[0]->examples.front().features != domains[1]->examples.front().features);
}

TEST_CASE("pump generator is deterministic per seed") {
  const SpectrumConfig cfg = default_pump_config();
  const auto a = generate_pump_domains(cfg, 3, 5, 17);
  const auto b = generate_pump_domains(cfg, 3, 5, 17);
  for (int i = 0; i < 3; ++i) {
    REQUIRE(a[i]->size() == b[i]->size());
    for (std::size_t j = 0; j < a[i]->size(); ++j) {
      CHECK(a[i]->examples[j].features == b[i]->examples[j].features);
    }
  }
}

TEST_CASE("csv spectra load, reject, and round-trip") {
  CsvSchema schema;
  schema.bins = 4;
  schema.label_vocabulary = {"normal", "idle", "cavitation"};

  const std::string path = tmp_path("t_spectra.csv");
  {
    std::ofstream f(path);
    f << "bin_0,bin_1,bin_2,bin_3,label,domain\n";
    f << "0.5,1.25,0,3.5,normal,unitA\n";
    f << "1,2,3,4,idle,unitA\n";
    f << "0.1,0.2,0.25,0.125,cavitation,unitA\n";
  }
  const DomainDataset d = load_csv_spectra(path, schema);
  CHECK(d.examples.size() == 3);
  CHECK(d.domain_id == "unitA");
  CHECK(d.examples[1].label == 1);
  CHECK(d.examples[0].features[1] == 1.25f);

  {
    std::ofstream f(path);
    f << "bin_0,bin_1,bin_2,bin_3,label,domain\n";
    f << "0.5,1.25,0,normal,unitA\n";  // one bin short
  }
  CHECK_THROWS_AS(load_csv_spectra(path, schema), FormatError);

  {
    std::ofstream f(path);
    f << "bin_0,bin_1,bin_2,bin_3,label,domain\n";
    f << "0.5,1.25,0,3.5,exploded,unitA\n";
  }
  CHECK_THROWS_AS(load_csv_spectra(path, schema), LabelError);

  // Round-trip a generated pump domain through csv.
  SpectrumConfig cfg = default_pump_config();
  CsvSchema full;
  full.bins = cfg.bins;
  for (const auto& ce : cfg.class_effects) full.label_vocabulary.push_back(ce.label);
  const auto generated = generate_pump_domains(cfg, 1, 6, 23)[0];
  const std::string rt = tmp_path("t_roundtrip.csv");
  export_csv_spectra(rt, *generated, full);
  const DomainDataset back = load_csv_spectra(rt, full);
  REQUIRE(back.examples.size() == generated->examples.size());
  for (std::size_t i = 0; i < back.examples.size(); ++i) {
    CHECK(back.examples[i].label == generated->examples[i].label);
    CHECK(back.examples[i].features == generated->examples[i].features);
  }
}

TEST_CASE("split_domains partitions deterministically") {
  std::vector<DomainPtr> domains;
  for (int i = 0; i < 56; ++i) {
    domains.push_back(make_synthetic_domain("d" + std::to_string(i), 3, 6, {2}, 100 + i));
  }
  const DomainSplit s = split_domains(domains, {40, 8, 8}, 13);
  CHECK(s.train.size() == 40);
  CHECK(s.validation.size() == 8);
  CHECK(s.test.size() == 8);
  std::set<std::string> all(s.train.begin(), s.train.end());
  all.insert(s.validation.begin(), s.validation.end());
  all.insert(s.test.begin(), s.test.end());
  CHECK(all.size() == 56);

  const DomainSplit again = split_domains(domains, {40, 8, 8}, 13);
  CHECK(again.train == s.train);
  CHECK(again.test == s.test);

  const DomainSplit all_train = split_domains(domains, {56, 0, 0}, 13);
  CHECK(all_train.train.size() == 56);
  CHECK(all_train.test.empty());

  CHECK_THROWS_AS(split_domains(domains, {40, 8, 9}, 13), ConfigError);
}

TEST_CASE("explicit split supports the leave-one-unit-out pattern") {
  const auto domains = generate_pump_domains(default_pump_config(), 32, 4, 3);
  std::vector<std::string> train, val, test;
  for (const auto& d : domains) {
    const auto& p = d->descriptor.pump;
    if (p.surface == "steel" && p.unit != "P4") {
      train.push_back(d->domain_id);
    } else if (p.surface == "steel") {
      val.push_back(d->domain_id);
    } else if (p.unit == "P4") {
      test.push_back(d->domain_id);
    }
  }
  const DomainSplit s = split_domains_explicit(domains, train, val, test);
  CHECK(s.train.size() == 12);
  CHECK(s.validation.size() == 4);
  CHECK(s.test.size() == 4);

  CHECK_THROWS_AS(split_domains_explicit(domains, {"nope"}, {}, {}), ConfigError);
  CHECK_THROWS_AS(split_domains_explicit(domains, {domains[0]->domain_id},
                                         {domains[0]->domain_id}, {}),
                  ConfigError);
}

TEST_CASE("downsample_balanced applies the min rule") {
  auto d = std::make_shared<DomainDataset>();
  d->domain_id = "imbalanced";
  d->feature_shape = {2};
  Rng rng = Rng::stream(3, "fill");
  const int counts[3] = {5, 9, 7};
  for (int c = 0; c < 3; ++c) {
    for (int i = 0; i < counts[c]; ++i) {
      d->examples.push_back(
          {{static_cast<float>(rng.uniform()), static_cast<float>(rng.uniform())}, c});
    }
  }
  finalize_counts(*d);
  const DomainPtr down = downsample_balanced(d, 29);
  for (const auto& [label, count] : down->class_counts) CHECK(count == 5);
  CHECK(down->size() == 15);

  const DomainPtr again = downsample_balanced(d, 29);
  for (std::size_t i = 0; i < down->size(); ++i) {
    CHECK(again->examples[i].features == down->examples[i].features);
  }

  const DomainPtr balanced = make_synthetic_domain("already", 3, 4, {2}, 31);
  const DomainPtr same = downsample_balanced(balanced, 5);
  REQUIRE(same->size() == balanced->size());
  for (std::size_t i = 0; i < same->size(); ++i) {
    CHECK(same->examples[i].features == balanced->examples[i].features);
    CHECK(same->examples[i].label == balanced->examples[i].label);
  }
}
