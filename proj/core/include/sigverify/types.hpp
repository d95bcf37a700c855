#pragma once

#include <optional>
#include <string>
#include <vector>

namespace sigverify {

enum class Modality { Pen, Finger };
enum class PenState { Up, Down };
enum class Label { Genuine, Skilled };
enum class Split { Dev, Eval };
enum class SourceFormat { Canonical, SvcStyle, Synthetic };

// Which device family the defaults are tuned for: Office = digitizing
// tablet captures, Mobile = hand-held touchscreen captures.
enum class DeviceProfile { Office, Mobile };

struct SamplePoint {
  double t = 0.0;  // seconds, strictly increasing within a signature
  double x = 0.0;  // raw device units
  double y = 0.0;
  // Engaged state only for pen captures; finger rows carry no pressure.
  std::optional<double> pressure;
  PenState pen_state = PenState::Down;
};

struct RawSignature {
  std::vector<SamplePoint> samples;
  Modality modality = Modality::Pen;
  std::string user_id = "unknown";
  int session = 1;
  Label label = Label::Genuine;
  SourceFormat source_format = SourceFormat::Canonical;
};

inline const char* to_string(Modality m) {
  return m == Modality::Pen ? "pen" : "finger";
}

inline const char* to_string(Label l) {
  return l == Label::Genuine ? "genuine" : "skilled";
}

inline const char* to_string(Split s) { return s == Split::Dev ? "dev" : "eval"; }

inline const char* to_string(DeviceProfile p) {
  return p == DeviceProfile::Office ? "office" : "mobile";
}

}  // namespace sigverify
