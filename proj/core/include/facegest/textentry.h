#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "facegest/mapping.h"

namespace facegest::textentry {

using mapping::MouthState;
using mapping::Vowel;

// 12-key telephone keypad: '0'..'9', '*', '#'.
bool is_keypad_key(char key);

struct KeyEvent {
  char key = '0';
  std::int64_t t_ms = 0;
};

// Consonant rows of the gojuon chart ("Vowel" is the bare a-i-u-e-o row).
enum class KanaRow { Vowel, K, S, T, N, H, M, Y, R, W };

struct KanaLayout {
  // Feature-phone assignment: 1=a, 2=k, 3=s, 4=t, 5=n, 6=h, 7=m, 8=y, 9=r, 0=w.
  std::map<char, KanaRow> rows;
  char dakuten_key = '*';
  char small_key = '#';
  // Key 0 pressed with a closed mouth (no vowel) emits ん.
  bool n_on_closed_zero = true;

  static KanaLayout standard();
  // Throws DataError unless every row is reachable from exactly one key.
  void validate() const;
};

struct ComposerState {
  std::optional<std::string> last_emitted;
  bool pending_small = false;

  friend bool operator==(const ComposerState&, const ComposerState&) = default;
};

struct ComposeResult {
  std::string text;          // kana appended to the transcript (may be empty)
  bool yoon = false;         // small ya/yu/yo joined an i-column kana
  ComposerState state;
};

// (row key, vowel) -> kana. A missing vowel is a closed mouth: ん on key 0 when
// the layout allows it, otherwise nothing. Throws ContractViolation for a
// modifier or non-keypad key.
ComposeResult kana_compose(const KeyEvent& key, std::optional<Vowel> vowel, const ComposerState& state,
                           const KanaLayout& layout = KanaLayout::standard());

struct DakutenResult {
  std::string replacement;  // new form of last_emitted (unchanged if it has none)
  bool warning = false;     // nothing had been emitted yet
  ComposerState state;
};

// Cycles the last kana through base -> dakuten (-> handakuten on the h row) -> base.
DakutenResult apply_dakuten(const ComposerState& state);

// Toggles the small-form flag for the next kana.
ComposerState toggle_small(const ComposerState& state);

// E.161 letters on keys 2..9. Throws ContractViolation outside 2..9.
const std::string& letters_on_key(char key);

// Closed/SlightlyOpen/Open pick the 1st/2nd/3rd letter; Pucker picks s (key 7)
// or z (key 9) and is rejected (nullopt) on three-letter keys.
std::optional<char> roman_select(const KeyEvent& key, MouthState mouth);

// Letter for |press_count| presses of |key| (wraps around the key's letters).
char multitap(const KeyEvent& key, int press_count);

// Replays timestamped key presses with multi-tap semantics: a different key
// or a gap longer than the commit timeout commits the pending letter.
class MultiTapDecoder {
 public:
  explicit MultiTapDecoder(std::int64_t commit_timeout_ms = 1000) : timeout_ms_(commit_timeout_ms) {}

  // Returns the letter committed by this press, if any.
  std::optional<char> press(const KeyEvent& key);
  std::optional<char> flush();

 private:
  std::int64_t timeout_ms_;
  std::optional<KeyEvent> pending_;
  int count_ = 0;
};

// One logged text-entry event: a key press plus the mouth input at that time.
struct EntryEvent {
  std::int64_t t_ms = 0;
  std::optional<char> key;
  std::optional<MouthState> mouth;
  std::optional<Vowel> vowel;
  std::optional<std::string> emitted;
};

void to_json(nlohmann::json& j, const EntryEvent& e);
void from_json(const nlohmann::json& j, EntryEvent& e);

struct EntryLog {
  std::vector<EntryEvent> events;
  std::string transcript;
  std::string target;
};

std::size_t utf8_length(const std::string& s);
std::vector<std::string> utf8_split(const std::string& s);

// Manual key presses per produced character. Throws ContractViolation for an
// empty transcript or a non-empty transcript without key presses.
double kspc(const EntryLog& log);

// (characters / 5) / minutes between the first and last event.
// Throws DomainError with fewer than two events or zero elapsed time.
double entry_speed(const EntryLog& log);

enum class EntryMethod { MouthTypeKana, MouthTypeRoman, MultiTapRoman, MultiTapKana };

// Deterministic replays: the transcript is a pure function of the events.
// Fills |emitted| on each event that produced text.
EntryLog replay_kana(std::vector<EntryEvent> events, const KanaLayout& layout = KanaLayout::standard());
EntryLog replay_roman(std::vector<EntryEvent> events);
EntryLog replay_multitap_roman(std::vector<EntryEvent> events, std::int64_t commit_timeout_ms = 1000);
EntryLog replay_multitap_kana(std::vector<EntryEvent> events, std::int64_t commit_timeout_ms = 1000,
                              const KanaLayout& layout = KanaLayout::standard());

// The 45 base kana of the gojuon chart (あ .. を, no ん), row by row.
std::vector<std::string> base_gojuon();

// Where a kana lives on the keypad: row key, vowel, and modifiers needed.
struct KanaKeying {
  char key = '1';
  std::optional<Vowel> vowel;  // nullopt for ん
  int dakuten_presses = 0;
  bool small = false;
};
std::optional<KanaKeying> keying_for(const std::string& kana, const KanaLayout& layout = KanaLayout::standard());

// Hepburn-style romanization used by the romaji multi-tap baseline.
std::string romaji(const std::string& kana);

// Event generators for equal per-event timing comparisons. Every key event is
// |interval_ms| after the previous one; multi-tap inserts |commit_timeout_ms|
// before a letter that shares a key with the previous one.
std::vector<EntryEvent> mouthtype_kana_events(const std::string& text, std::int64_t interval_ms,
                                              const KanaLayout& layout = KanaLayout::standard());
std::vector<EntryEvent> multitap_kana_events(const std::string& text, std::int64_t interval_ms,
                                             std::int64_t commit_timeout_ms = 1000,
                                             const KanaLayout& layout = KanaLayout::standard());
std::vector<EntryEvent> mouthtype_roman_events(const std::string& text, std::int64_t interval_ms);
std::vector<EntryEvent> multitap_roman_events(const std::string& text, std::int64_t interval_ms,
                                              std::int64_t commit_timeout_ms = 1000);

}  // namespace facegest::textentry
