#pragma once

#include <filesystem>
#include <map>
#include <memory>
#include <mutex>
#include <json.hpp>
#include <string>

#include "drt/targets/adapter.hpp"

namespace drt::targets {

// Wire schema shared with the fixture files:
//   classify {"labels":  [{"name", "score"}]}
//   detect   {"objects": [{"name", "score", "bbox": [x1, y1, x2, y2]}]}
//   segment  {"mask_path": "<file relative to the fixture dir>"}
nlohmann::json encode_response(const Prediction& prediction, Task task, const LabelMap& labels);

// Raises TargetFailure on schema violations or unknown label names.
Prediction parse_response(const nlohmann::json& response, Task task, const LabelMap& labels,
                          const std::filesystem::path& fixture_dir);

// Source of raw responses keyed by the image content hash.
class ResponseSource {
 public:
  virtual ~ResponseSource() = default;
  // Throws NotInFixture for unknown keys, TransientFailure for retryable
  // errors.
  virtual nlohmann::json fetch(const std::string& content_hash) const = 0;
};

// Reads {fixture_dir}/{sha256}.json. A manifest entry may declare
// "transient_failures": k, in which case the first k fetches of that key
// fail with TransientFailure.
class FixtureSource final : public ResponseSource {
 public:
  explicit FixtureSource(std::filesystem::path fixture_dir);

  nlohmann::json fetch(const std::string& content_hash) const override;

  Task task() const { return task_; }
  const LabelMap& label_map() const { return labels_; }
  const std::string& service() const { return service_; }
  const std::filesystem::path& dir() const { return dir_; }
  std::size_t entry_count() const { return entries_.size(); }

 private:
  struct Entry {
    std::string file;
    int transient_failures = 0;
  };

  std::filesystem::path dir_;
  Task task_ = Task::classify;
  LabelMap labels_;
  std::string service_;
  std::map<std::string, Entry> entries_;
  mutable std::mutex mutex_;
  mutable std::map<std::string, int> failures_served_;
};

struct RetryPolicy {
  int max_attempts = 3;
};

// Offline stand-in for a remote vision API: hashes the losslessly encoded
// image, fetches the canned response and parses it.
class MockApiAdapter final : public TargetAdapter {
 public:
  MockApiAdapter(std::shared_ptr<const FixtureSource> source, RetryPolicy retry = {});

  Task task() const override { return source_->task(); }
  const LabelMap& label_map() const override { return source_->label_map(); }
  std::string identity() const override { return "mock:" + source_->service(); }
  Prediction invoke(const Tensor& image) const override;

 private:
  std::shared_ptr<const FixtureSource> source_;
  RetryPolicy retry_;
};

std::unique_ptr<TargetAdapter> mock_api_adapter(const std::filesystem::path& fixture_dir, RetryPolicy retry = {});

// Records the answers of `adapter` on every image as a fixture directory
// with a manifest, so the mock can replay them. Images whose hash is
// already present are skipped.
void record_fixture(const TargetAdapter& adapter, const ImageBatch& images, const std::filesystem::path& fixture_dir,
                    const std::string& service);

}  // namespace drt::targets
