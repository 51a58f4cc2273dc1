#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include <nlohmann/json.hpp>

#include "facegest/frameio.h"
#include "facegest/mapping.h"
#include "facegest/mouthseg.h"
#include "facegest/tasks.h"
#include "facegest/textentry.h"
#include "facegest/trackers.h"

namespace facegest::gateway {

enum class TrackerKind { NF, NP, FixedRoi };
enum class Application { None, Circle, Ellipse, Tapping, TextJp, TextRoman };

std::string to_string(TrackerKind k);
TrackerKind tracker_kind_from_string(const std::string& s);
std::string to_string(Application a);
Application application_from_string(const std::string& s);

struct CalibrationSource {
  enum class Kind { None, Inline, File, LiveWindow };
  Kind kind = Kind::None;
  // Inline and file sources are resolved when the config is parsed.
  std::optional<mapping::Calibration> calibration;
  std::string path;
  int window_frames = 30;
};

struct ClickConfig {
  double t_open = 0.5;
  double t_close = 0.2;
  int min_open_frames = 3;
};

struct SessionConfig {
  TrackerKind tracker = TrackerKind::FixedRoi;
  trackers::TrackerConfig tracker_config;
  // fixed_roi: the ROI (full frame when absent). np: optional mouth ROI.
  std::optional<frameio::OrientedRoi> roi;
  // np: initial eye positions (left, right).
  std::optional<std::pair<Point2, Point2>> eyes;
  double cursor_gain = 4.0;
  trackers::Screen screen;
  mouthseg::SegmentationParams segmentation;
  std::vector<mapping::MappingSpec> mappings;
  Application application = Application::None;
  tasks::CircleTaskConfig circle;
  tasks::EllipseTaskConfig ellipse;
  tasks::TappingTaskConfig tapping;
  textentry::KanaLayout layout = textentry::KanaLayout::standard();
  CalibrationSource calibration;
  ClickConfig click;
  mapping::MouthStateThresholds mouth_thresholds;

  // Throws DataError: np without eyes, tapping without a cursor-producing
  // tracker, an application that needs calibration without a calibration source.
  void validate() const;
};

// File calibration paths are resolved against |base_dir|.
SessionConfig parse_session_config(const nlohmann::json& j, const std::filesystem::path& base_dir = {});
SessionConfig load_session_config(const std::filesystem::path& file);
nlohmann::json to_json(const SessionConfig& config);

// One client session: consumes protocol messages in arrival order and returns
// the server messages each one produces.
class Session {
 public:
  // Without a config the client must send one in "hello".
  explicit Session(std::optional<SessionConfig> config = std::nullopt, std::filesystem::path base_dir = {});

  std::vector<nlohmann::json> handle_line(std::string_view line);
  std::vector<nlohmann::json> handle(const nlohmann::json& message);

  // Direct entry points shared by the replay path.
  std::vector<nlohmann::json> process_frame(const frameio::Frame& frame, std::int64_t seq, std::int64_t t_ms);
  std::vector<nlohmann::json> key_event(const nlohmann::json& event);

  bool ended() const { return ended_; }
  bool configured() const { return config_.has_value(); }
  const std::optional<mapping::Calibration>& calibration() const { return calib_; }

 private:
  void reset(SessionConfig config);
  nlohmann::json error(const std::string& message) const;

  std::filesystem::path base_dir_;
  std::optional<SessionConfig> config_;
  bool ended_ = false;

  std::optional<std::int64_t> last_seq_;
  std::int64_t last_t_ms_ = 0;

  // Tracker state.
  trackers::NostrilState nf_;
  trackers::NoseState np_;
  bool np_ready_ = false;
  std::optional<Point2> reference_;
  Point2 cursor_{};
  bool have_cursor_ = false;

  // Calibration and mouth state.
  std::optional<mapping::Calibration> calib_;
  std::vector<mouthseg::MouthShape> calib_window_;
  std::optional<mapping::MouthState> mouth_state_;
  std::optional<mapping::Vowel> vowel_;
  trackers::ClickDetector click_;
  std::vector<mapping::MapperState> mapper_states_;

  // Applications.
  tasks::HoldState hold_;
  tasks::TappingState tapping_;
  textentry::ComposerState composer_;
};

}  // namespace facegest::gateway
