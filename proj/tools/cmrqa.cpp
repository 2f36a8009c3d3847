#include <algorithm>
#include <chrono>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>
#include <png.h>
#include <spdlog/sinks/stdout_color_sinks.h>
#include <spdlog/spdlog.h>

#include "cmrqa/config.hpp"
#include "cmrqa/dataprep.hpp"
#include "cmrqa/decision.hpp"
#include "cmrqa/metrics.hpp"
#include "cmrqa/model_classifier.hpp"
#include "cmrqa/synth.hpp"
#include "cmrqa/volume_io.hpp"

namespace fs = std::filesystem;
using nlohmann::ordered_json;

namespace {

enum Exit : int {
  kOk = 0,
  kUsage = 2,
  kConfig = 3,
  kIo = 4,
  kFormat = 5,
  kValidation = 6,
  kInternal = 70,
};

int exit_code_for(const cmrqa::Error& e) {
  const std::string kind = e.kind();
  if (kind == "config") return kConfig;
  if (kind == "io") return kIo;
  if (kind == "format") return kFormat;
  if (kind == "validation") return kValidation;
  return kInternal;
}

void report_error(const std::string& kind, const std::string& message, int code) {
  ordered_json j;
  j["error"] = kind;
  j["message"] = message;
  j["exit_code"] = code;
  std::cerr << j.dump() << std::endl;
}

// Flags shared by every subcommand; set values override the config file.
struct Common {
  std::string config;
  std::optional<std::uint64_t> seed;
  std::string mask;
  bool no_mask = false;
  std::string out;
  std::optional<std::size_t> workers;
};

void add_common(CLI::App* app, Common& c) {
  app->add_option("--config", c.config, "Pipeline JSON config");
  app->add_option("--seed", c.seed, "Random seed (overrides config)");
  auto* mask = app->add_option("--mask", c.mask, "Mask file, or mask directory for predict");
  auto* no_mask = app->add_flag("--no-mask", c.no_mask, "Ignore masks and use the centre-square fallback ROI");
  mask->excludes(no_mask);
  app->add_option("--out", c.out, "Output directory");
  app->add_option("--workers", c.workers, "Worker threads (never changes results)")->check(CLI::PositiveNumber);
}

cmrqa::PipelineConfig effective_config(const Common& c) {
  cmrqa::PipelineConfig cfg;
  if (!c.config.empty()) cfg = cmrqa::load_config(c.config);
  if (c.seed) cfg.seed = *c.seed;
  if (c.workers) cfg.workers = *c.workers;
  if (c.no_mask) cfg.use_masks = false;
  if (!c.out.empty()) cfg.output_dir = fs::absolute(c.out).lexically_normal();
  cfg.validate();
  return cfg;
}

fs::path output_dir(const cmrqa::PipelineConfig& cfg) {
  const fs::path dir = cfg.output_dir.value_or(fs::current_path());
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw cmrqa::IoError("cannot create output directory '" + dir.string() + "': " + ec.message());
  return dir;
}

void write_text(const fs::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw cmrqa::IoError("cannot write '" + path.string() + "'");
  out << text;
  if (!out) throw cmrqa::IoError("write error on '" + path.string() + "'");
}

void write_json(const fs::path& path, const ordered_json& j) { write_text(path, j.dump(2) + "\n"); }

// 16-bit grayscale PNG of an image whose values lie in [0, 1].
void write_png16(const fs::path& path, const cmrqa::SliceImage& img) {
  FILE* fp = std::fopen(path.string().c_str(), "wb");
  if (!fp) throw cmrqa::IoError("cannot write '" + path.string() + "'");
  png_structp png = png_create_write_struct(PNG_LIBPNG_VER_STRING, nullptr, nullptr, nullptr);
  png_infop info = png ? png_create_info_struct(png) : nullptr;
  if (!png || !info || setjmp(png_jmpbuf(png))) {
    png_destroy_write_struct(&png, &info);
    std::fclose(fp);
    throw cmrqa::IoError("libpng failed writing '" + path.string() + "'");
  }
  png_init_io(png, fp);
  png_set_IHDR(png, info, static_cast<png_uint_32>(img.cols()), static_cast<png_uint_32>(img.rows()), 16,
               PNG_COLOR_TYPE_GRAY, PNG_INTERLACE_NONE, PNG_COMPRESSION_TYPE_DEFAULT, PNG_FILTER_TYPE_DEFAULT);
  png_write_info(png, info);
  std::vector<png_byte> row(img.cols() * 2);
  for (std::size_t r = 0; r < img.rows(); ++r) {
    for (std::size_t c = 0; c < img.cols(); ++c) {
      const auto v = static_cast<unsigned>(std::lround(std::clamp(img(r, c), 0.0, 1.0) * 65535.0));
      row[2 * c] = static_cast<png_byte>(v >> 8);
      row[2 * c + 1] = static_cast<png_byte>(v & 0xff);
    }
    png_write_row(png, row.data());
  }
  png_write_end(png, nullptr);
  png_destroy_write_struct(&png, &info);
  std::fclose(fp);
}

std::vector<std::vector<std::string>> read_csv(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw cmrqa::IoError("cannot read '" + path.string() + "'");
  std::vector<std::vector<std::string>> rows;
  std::string line;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    std::vector<std::string> cells;
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ',')) cells.push_back(cell);
    rows.push_back(std::move(cells));
  }
  return rows;
}

// CSV with a header row and columns scan_id, subject_id, label, n_slices.
std::vector<cmrqa::ScanRecord> read_roster(const fs::path& path) {
  const auto rows = read_csv(path);
  if (rows.empty()) throw cmrqa::FormatError("roster '" + path.string() + "' is empty");
  std::vector<cmrqa::ScanRecord> scans;
  for (std::size_t r = 1; r < rows.size(); ++r) {
    const auto& row = rows[r];
    if (row.size() < 4)
      throw cmrqa::FormatError("roster '" + path.string() + "' line " + std::to_string(r + 1) +
                               ": expected scan_id,subject_id,label,n_slices");
    cmrqa::ScanRecord s;
    s.scan_id = row[0];
    s.subject_id = row[1];
    s.label = cmrqa::parse_level(row[2]);
    try {
      s.n_slices = std::stoul(row[3]);
    } catch (const std::exception&) {
      throw cmrqa::FormatError("roster '" + path.string() + "' line " + std::to_string(r + 1) + ": bad n_slices");
    }
    if (s.n_slices == 0) throw cmrqa::ValidationError("scan '" + s.scan_id + "' has no slices");
    scans.push_back(s);
  }
  return scans;
}

// First two columns of a headed CSV: key, label.
std::map<std::string, cmrqa::ArtefactLevel> read_labels(const fs::path& path) {
  const auto rows = read_csv(path);
  std::map<std::string, cmrqa::ArtefactLevel> out;
  for (std::size_t r = 1; r < rows.size(); ++r) {
    if (rows[r].size() < 2)
      throw cmrqa::FormatError("'" + path.string() + "' line " + std::to_string(r + 1) + ": expected id,label");
    if (!out.emplace(rows[r][0], cmrqa::parse_level(rows[r][1])).second)
      throw cmrqa::ValidationError("'" + path.string() + "' lists '" + rows[r][0] + "' twice");
  }
  return out;
}

std::string_view roi_name(cmrqa::RoiSource s) { return s == cmrqa::RoiSource::mask ? "mask" : "fallback_center"; }

cmrqa::SliceImage slice_image(const cmrqa::Volume& v, std::size_t k) {
  auto s = v.slice(k);
  return cmrqa::SliceImage(v.height(), v.width(), std::vector<double>(s.begin(), s.end()));
}

ordered_json patch_entry(const std::string& subject, std::size_t slice, const cmrqa::PatchOrigin& o,
                         cmrqa::Representation rep, cmrqa::RoiSource roi) {
  ordered_json e;
  e["subject"] = subject;
  e["slice"] = slice;
  e["origin"] = {o.row, o.col};
  e["fallback"] = o.fallback;
  e["representation"] = cmrqa::to_string(rep);
  e["roi"] = roi_name(roi);
  return e;
}

cmrqa::MaskVolume mask_for(const cmrqa::Volume& v, const cmrqa::PipelineConfig& cfg,
                           const std::optional<fs::path>& mask_file) {
  if (!cfg.use_masks) return cmrqa::MaskVolume::zeros(v.shape());
  if (mask_file) return cmrqa::load_mask(*mask_file, v);
  spdlog::warn("no mask given for {}; using the fallback ROI", v.subject_id());
  return cmrqa::MaskVolume::zeros(v.shape());
}

// ---- gradmag ---------------------------------------------------------------

int run_gradmag(const Common& common, const std::string& input, bool png) {
  const auto cfg = effective_config(common);
  const auto dir = output_dir(cfg);
  const auto v = cmrqa::load_volume(input);
  std::vector<double> out;
  out.reserve(v.shape().voxel_count());
  std::vector<cmrqa::SliceImage> maps;
  for (std::size_t k = 0; k < v.slices(); ++k) {
    auto g = cmrqa::make_representations(slice_image(v, k), cfg.norm).gradmag;
    out.insert(out.end(), g.values().begin(), g.values().end());
    if (png) maps.push_back(std::move(g));
  }
  const auto stem = cmrqa::detail::volume_stem(input);
  cmrqa::VolumeInfo info = v.info();
  info.subject_id = stem + "_gradmag";
  cmrqa::write_raw(dir / (stem + "_gradmag.json"), cmrqa::Volume(v.shape(), std::move(out), info));
  for (std::size_t k = 0; k < maps.size(); ++k) {
    char name[64];
    std::snprintf(name, sizeof name, "_gradmag_s%03zu.png", k);
    write_png16(dir / (stem + name), maps[k]);
  }
  spdlog::info("gradmag: {} slices of {} written to {}", v.slices(), input, dir.string());
  return kOk;
}

// ---- sample ----------------------------------------------------------------

int run_sample(const Common& common, const std::string& input, std::optional<std::size_t> count, bool png) {
  auto cfg = effective_config(common);
  const auto dir = output_dir(cfg);
  const auto v = cmrqa::load_volume(input);
  const auto mask =
      mask_for(v, cfg, common.mask.empty() ? std::nullopt : std::optional<fs::path>(common.mask));
  auto sampler = cfg.pipeline_params().sampler;
  const std::size_t n = count.value_or(sampler.patches_per_slice_test);
  if (n == 0) throw cmrqa::ValidationError("--count must be positive");

  ordered_json manifest;
  manifest["subject"] = v.subject_id();
  manifest["patch_size"] = sampler.patch_size;
  manifest["patches"] = ordered_json::array();
  if (png) fs::create_directories(dir / "png");
  for (std::size_t k = 0; k < v.slices(); ++k) {
    const auto reps = cmrqa::make_representations(slice_image(v, k), cfg.norm);
    const auto roi = cmrqa::roi_for_slice(mask, k, sampler.patch_size);
    const auto origins = cmrqa::sample_origins(roi, n, sampler, cmrqa::slice_stream_id(v.subject_id(), k));
    for (auto rep : {cmrqa::Representation::intensity, cmrqa::Representation::gradmag}) {
      const auto& img = rep == cmrqa::Representation::intensity ? reps.intensity : reps.gradmag;
      for (std::size_t p = 0; p < origins.size(); ++p) {
        manifest["patches"].push_back(patch_entry(v.subject_id(), k, origins[p], rep, roi.source()));
        if (png) {
          char name[96];
          std::snprintf(name, sizeof name, "_s%03zu_p%03zu_%s.png", k, p,
                        rep == cmrqa::Representation::intensity ? "int" : "mag");
          write_png16(dir / "png" / (v.subject_id() + name), cmrqa::extract_patch(img, origins[p], sampler.patch_size));
        }
      }
    }
  }
  write_json(dir / (v.subject_id() + "_patches.json"), manifest);
  return kOk;
}

// ---- split / balance -------------------------------------------------------

int run_split(const Common& common, const std::string& roster, std::size_t k, std::size_t min_severe,
              std::size_t max_retries) {
  const auto cfg = effective_config(common);
  const auto dir = output_dir(cfg);
  const auto scans = read_roster(roster);
  cmrqa::FoldOptions opt;
  opt.k = k;
  opt.seed = cfg.seed;
  opt.min_severe_per_fold = min_severe;
  opt.max_retries = max_retries;
  const auto folds = cmrqa::make_folds(scans, opt);

  ordered_json j;
  j["k"] = folds.k;
  j["seed"] = cfg.seed;
  j["attempts"] = folds.attempts;
  j["subject_fold"] = ordered_json::object();
  for (const auto& [s, f] : folds.subject_fold) j["subject_fold"][s] = f;
  j["folds"] = ordered_json::array();
  for (std::size_t f = 0; f < folds.k; ++f) {
    ordered_json fj;
    fj["fold"] = f;
    fj["subjects"] = folds.subjects_in(f);
    fj["tally"] = {{"mild", folds.tallies[f][0]}, {"intermediate", folds.tallies[f][1]}, {"severe", folds.tallies[f][2]}};
    j["folds"].push_back(fj);
  }
  write_json(dir / "folds.json", j);
  return kOk;
}

int run_balance(const Common& common, const std::string& roster, const std::string& folds_path,
                std::optional<std::size_t> holdout, std::optional<std::size_t> batch_size) {
  auto cfg = effective_config(common);
  if (batch_size) cfg.batch_size = *batch_size;
  const auto dir = output_dir(cfg);
  const auto scans = read_roster(roster);

  std::optional<std::set<std::string>> subjects;
  if (!folds_path.empty()) {
    if (!holdout) throw cmrqa::ConfigError("--folds needs --holdout <fold>");
    std::ifstream in(folds_path);
    if (!in) throw cmrqa::IoError("cannot read '" + folds_path + "'");
    nlohmann::json fj;
    try {
      in >> fj;
    } catch (const nlohmann::json::exception& e) {
      throw cmrqa::FormatError("'" + folds_path + "' is not valid JSON: " + e.what());
    }
    subjects.emplace();
    for (const auto& [s, f] : fj.at("subject_fold").items())
      if (f.get<std::size_t>() != *holdout) subjects->insert(s);
  }
  const auto pools = cmrqa::slice_pools(scans, subjects ? &*subjects : nullptr);
  const auto m = cmrqa::balanced_batches(pools, cfg.batch_size, cfg.seed);

  ordered_json j;
  j["batch_size"] = m.batch_size;
  j["patches_per_entry"] = m.patches_per_entry;
  j["seed"] = cfg.seed;
  if (holdout) j["holdout_fold"] = *holdout;
  j["batches"] = ordered_json::array();
  for (const auto& b : m.batches) {
    ordered_json bj = ordered_json::array();
    for (const auto& e : b)
      bj.push_back({{"scan_id", e.scan_id}, {"slice", e.slice_index}, {"label", cmrqa::to_string(e.label)}});
    j["batches"].push_back(bj);
  }
  write_json(dir / "batches.json", j);
  return kOk;
}

// ---- predict ---------------------------------------------------------------

std::vector<fs::path> predict_inputs(cmrqa::PipelineConfig& cfg, const std::vector<std::string>& positional) {
  std::vector<fs::path> files;
  if (!positional.empty()) {
    cfg.inputs.clear();
    for (const auto& p : positional) {
      files.push_back(fs::absolute(p).lexically_normal());
      cfg.inputs.push_back(files.back().string());
    }
    return files;
  }
  if (!cfg.inputs.empty()) {
    for (const auto& name : cfg.inputs) {
      fs::path p(name);
      files.push_back(p.is_absolute() || !cfg.data_root ? p : *cfg.data_root / p);
    }
    return files;
  }
  if (!cfg.data_root) throw cmrqa::ConfigError("predict needs input volumes or a data_root");
  std::error_code ec;
  if (!fs::is_directory(*cfg.data_root, ec))
    throw cmrqa::IoError("data_root '" + cfg.data_root->string() + "' is not a directory");
  for (const auto& e : fs::directory_iterator(*cfg.data_root))
    if (e.is_regular_file() && cmrqa::is_volume_file(e.path())) files.push_back(e.path());
  std::sort(files.begin(), files.end());
  if (files.empty()) throw cmrqa::IoError("no volume files under '" + cfg.data_root->string() + "'");
  for (const auto& f : files) cfg.inputs.push_back(f.filename().string());
  return files;
}

int run_predict(const Common& common, const std::vector<std::string>& positional) {
  auto cfg = effective_config(common);
  if (!common.mask.empty()) {
    if (!fs::is_directory(common.mask)) throw cmrqa::ConfigError("predict --mask expects a mask directory");
    cfg.mask_root = fs::absolute(common.mask).lexically_normal();
  }
  if (cfg.classifiers.empty()) throw cmrqa::ConfigError("config declares no classifiers");
  const auto files = predict_inputs(cfg, positional);
  const auto dir = output_dir(cfg);
  fs::create_directories(dir / "patches");

  std::vector<cmrqa::RosterEntry> roster;
  for (const auto& spec : cfg.classifiers) roster.push_back({spec, cmrqa::load_classifier(spec)});
  cmrqa::validate_roster(roster, cfg.require_full_roster);
  const auto params = cfg.pipeline_params();

  ordered_json all = ordered_json::array();
  std::string csv = "subject,ensemble_label\n";
  for (const auto& file : files) {
    const auto t0 = std::chrono::steady_clock::now();
    const auto v = cmrqa::load_volume(file);
    std::optional<fs::path> mask_file;
    if (cfg.use_masks && cfg.mask_root) mask_file = *cfg.mask_root / file.filename();
    const auto mask = mask_for(v, cfg, mask_file);
    const auto pred = cmrqa::classify_subject(v, mask, roster, params);

    ordered_json manifest;
    manifest["subject"] = pred.subject_id;
    manifest["patch_size"] = params.sampler.patch_size;
    manifest["patches"] = ordered_json::array();
    std::set<cmrqa::Representation> reps;
    for (const auto& e : roster) reps.insert(e.spec.representation);
    for (const auto& s : pred.sampling)
      for (auto rep : reps)
        for (const auto& o : s.origins)
          manifest["patches"].push_back(patch_entry(pred.subject_id, s.slice_index, o, rep, s.roi_source));
    const std::string manifest_name = "patches/" + pred.subject_id + ".json";
    write_json(dir / manifest_name, manifest);

    ordered_json j;
    j["subject"] = pred.subject_id;
    j["file"] = file.filename().string();
    j["per_classifier"] = ordered_json::object();
    j["slice_counts"] = ordered_json::object();
    for (const auto& oc : pred.per_classifier) {
      j["per_classifier"][oc.name] = cmrqa::to_string(oc.label);
      j["slice_counts"][oc.name] = {
          {"mild", oc.counts.mild}, {"intermediate", oc.counts.intermediate}, {"severe", oc.counts.severe}};
    }
    j["ensemble"] = cmrqa::to_string(pred.ensemble);
    j["patches"] = manifest_name;
    all.push_back(j);
    csv += pred.subject_id + "," + std::string(cmrqa::to_string(pred.ensemble)) + "\n";
    spdlog::info("{}: {} ({} ms)", pred.subject_id, cmrqa::to_string(pred.ensemble),
                 std::chrono::duration_cast<std::chrono::milliseconds>(std::chrono::steady_clock::now() - t0).count());
  }
  write_json(dir / "predictions.json", all);
  write_text(dir / "predictions.csv", csv);
  write_json(dir / "effective_config.json", cmrqa::to_json(cfg));
  return kOk;
}

// ---- evaluate --------------------------------------------------------------

int run_evaluate(const Common& common, const std::string& truth_path, const std::string& pred_path) {
  const auto truth = read_labels(truth_path);
  const auto pred = read_labels(pred_path);
  std::vector<cmrqa::LabelPair> pairs;
  for (const auto& [id, t] : truth) {
    auto it = pred.find(id);
    if (it == pred.end()) throw cmrqa::ValidationError("no prediction for scan '" + id + "'");
    pairs.push_back({t, it->second});
  }
  for (const auto& [id, _] : pred)
    if (!truth.count(id)) throw cmrqa::ValidationError("prediction for unknown scan '" + id + "'");
  if (pairs.empty()) throw cmrqa::ValidationError("no scans to evaluate");

  const auto cm = cmrqa::confusion_matrix(pairs);
  const auto acc = cmrqa::accuracy(cm);
  const auto opt = [](const std::optional<double>& v) { return v ? ordered_json(*v) : ordered_json(nullptr); };
  ordered_json j;
  j["overall"] = acc.overall;
  j["mild"] = opt(acc.per_class[0]);
  j["inter"] = opt(acc.per_class[1]);
  j["severe"] = opt(acc.per_class[2]);
  j["kappa"] = cmrqa::cohen_kappa(cm);
  j["n"] = cm.total();
  j["confusion"] = ordered_json::array();
  for (const auto& row : cm.counts) j["confusion"].push_back(row);
  std::cout << j.dump(2) << std::endl;
  if (!common.out.empty()) {
    cmrqa::PipelineConfig cfg;
    cfg.output_dir = fs::absolute(common.out);
    write_json(output_dir(cfg) / "report.json", j);
  }
  return kOk;
}

// ---- synth -----------------------------------------------------------------

int run_synth(const Common& common, std::size_t per_tier, std::size_t held_in) {
  auto cfg = effective_config(common);
  const auto dir = output_dir(cfg);
  cmrqa::synth::Options opt;
  opt.seed = cfg.seed;
  opt.per_tier = per_tier;
  opt.held_in_per_tier = held_in;
  if (held_in == 0 || held_in >= per_tier) throw cmrqa::ConfigError("--held-in must be in [1, per-tier)");

  fs::create_directories(dir / "volumes");
  fs::create_directories(dir / "masks");
  const auto cases = cmrqa::synth::make_benchmark(opt);
  std::vector<cmrqa::synth::Case> calib;
  std::string labels = "scan_id,label\n", truth = "scan_id,label\n", roster = "scan_id,subject_id,label,n_slices\n";
  std::vector<std::string> eval_files;
  for (const auto& c : cases) {
    const std::string file = c.id + ".nii.gz";
    cmrqa::write_nifti(dir / "volumes" / file, c.volume, cmrqa::nifti::Datatype::int16);
    cmrqa::write_nifti(dir / "masks" / file, c.mask);
    const std::string label(cmrqa::to_string(c.label));
    labels += c.id + "," + label + "\n";
    roster += c.id + "," + c.id + "," + label + "," + std::to_string(c.volume.slices()) + "\n";
    if (c.held_in) {
      calib.push_back(c);
    } else {
      truth += c.id + "," + label + "\n";
      eval_files.push_back(file);
    }
  }

  auto params = cfg.pipeline_params();
  const auto cal = cmrqa::synth::calibrate(calib, params);
  ordered_json cj;
  cj["held_in"] = ordered_json::array();
  for (const auto& c : calib) cj["held_in"].push_back(c.id);
  for (auto [name, p, means] : {std::tuple{"intensity", cal.intensity, cal.intensity_means},
                                std::tuple{"gradmag", cal.gradmag, cal.gradmag_means}}) {
    cj[name] = {{"t1", p.t1}, {"t2", p.t2}, {"s", p.scale}, {"level_means", means}};
  }
  cj["held_in_correct"] = cal.held_in_correct;

  cmrqa::PipelineConfig run = cfg;
  run.classifiers = cmrqa::synth::roster_specs(cal);
  run.data_root = fs::path("volumes");
  run.mask_root = fs::path("masks");
  run.output_dir.reset();
  run.inputs = eval_files;
  write_json(dir / "config.json", cmrqa::to_json(run));
  write_json(dir / "calibration.json", cj);
  write_text(dir / "labels.csv", labels);
  write_text(dir / "truth.csv", truth);
  write_text(dir / "roster.csv", roster);
  spdlog::info("synth: {} volumes, {} held in, written to {}", cases.size(), calib.size(), dir.string());
  return kOk;
}

void setup_logging() {
  auto logger = spdlog::stderr_color_mt("cmrqa");
  spdlog::set_default_logger(logger);
  spdlog::set_pattern("[%l] %v");
  spdlog::set_level(spdlog::level::warn);
  if (const char* env = std::getenv("CMRQA_LOG")) {
    const auto lvl = spdlog::level::from_str(env);
    // from_str maps unknown names to off; only honour real names
    if (lvl != spdlog::level::off || std::string_view(env) == "off") spdlog::set_level(lvl);
  }
}

}  // namespace

int main(int argc, char** argv) {
  setup_logging();
  CLI::App app{"Cardiac MRI motion artefact quality assessment"};
  app.require_subcommand(1);

  Common common;
  std::string input, roster, folds, truth, pred;
  std::vector<std::string> inputs;
  bool png = false;
  std::optional<std::size_t> count, holdout, batch_size;
  std::size_t k = 5, min_severe = 3, max_retries = 1000, per_tier = 20, held_in = 4;

  auto* gradmag = app.add_subcommand("gradmag", "Write normalised gradient-magnitude maps of a volume");
  add_common(gradmag, common);
  gradmag->add_option("volume", input, "Input volume (.nii, .nii.gz or raw .json)")->required();
  gradmag->add_flag("--png", png, "Also write one 16-bit PNG per slice");

  auto* sample = app.add_subcommand("sample", "Sample ROI patch origins and write a patch manifest");
  add_common(sample, common);
  sample->add_option("volume", input, "Input volume")->required();
  sample->add_option("--count", count, "Patches per slice (default: config)");
  sample->add_flag("--png", png, "Dump every patch as a 16-bit PNG");

  auto* split = app.add_subcommand("split", "Subject-level k-fold split of a scan roster");
  add_common(split, common);
  split->add_option("--roster", roster, "CSV: scan_id,subject_id,label,n_slices")->required();
  split->add_option("--k", k, "Number of folds");
  split->add_option("--min-severe", min_severe, "Minimum severe scans per fold");
  split->add_option("--max-retries", max_retries, "Redraws before giving up");

  auto* balance = app.add_subcommand("balance", "Class-balanced training batch manifest");
  add_common(balance, common);
  balance->add_option("--roster", roster, "CSV: scan_id,subject_id,label,n_slices")->required();
  balance->add_option("--folds", folds, "folds.json from split");
  balance->add_option("--holdout", holdout, "Fold left out of training");
  balance->add_option("--batch-size", batch_size, "Batch size (multiple of 3)");

  auto* predict = app.add_subcommand("predict", "Classify volumes with the configured ensemble");
  add_common(predict, common);
  predict->add_option("volumes", inputs, "Volumes (default: inputs or data_root from config)");

  auto* evaluate = app.add_subcommand("evaluate", "Accuracy and Cohen's kappa of predictions against truth");
  add_common(evaluate, common);
  evaluate->add_option("--truth", truth, "CSV: scan_id,label")->required();
  evaluate->add_option("--pred", pred, "CSV: scan_id,label")->required();

  auto* synth = app.add_subcommand("synth", "Generate the synthetic benchmark and a calibrated config");
  add_common(synth, common);
  synth->add_option("--per-tier", per_tier, "Volumes per severity level");
  synth->add_option("--held-in", held_in, "Calibration volumes per level");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    report_error("usage", e.what(), kUsage);
    return kUsage;
  }

  try {
    if (*gradmag) return run_gradmag(common, input, png);
    if (*sample) return run_sample(common, input, count, png);
    if (*split) return run_split(common, roster, k, min_severe, max_retries);
    if (*balance) return run_balance(common, roster, folds, holdout, batch_size);
    if (*predict) return run_predict(common, inputs);
    if (*evaluate) return run_evaluate(common, truth, pred);
    if (*synth) return run_synth(common, per_tier, held_in);
  } catch (const cmrqa::Error& e) {
    const int code = exit_code_for(e);
    report_error(e.kind(), e.what(), code);
    return code;
  } catch (const fs::filesystem_error& e) {
    report_error("io", e.what(), kIo);
    return kIo;
  } catch (const nlohmann::json::exception& e) {
    report_error("format", e.what(), kFormat);
    return kFormat;
  } catch (const std::exception& e) {
    report_error("internal", e.what(), kInternal);
    return kInternal;
  }
  return kUsage;
}
