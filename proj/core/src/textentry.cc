#include "facegest/textentry.h"

#include <algorithm>
#include <array>
#include <set>

#include "facegest/errors.h"

namespace facegest::textentry {

namespace {

constexpr int kRowCount = 10;

// Gojuon chart, rows in KanaRow order, columns a-i-u-e-o. Empty cells are gaps.
const std::array<std::array<const char*, 5>, kRowCount> kChart = {{
    {"あ", "い", "う", "え", "お"},
    {"か", "き", "く", "け", "こ"},
    {"さ", "し", "す", "せ", "そ"},
    {"た", "ち", "つ", "て", "と"},
    {"な", "に", "ぬ", "ね", "の"},
    {"は", "ひ", "ふ", "へ", "ほ"},
    {"ま", "み", "む", "め", "も"},
    {"や", "", "ゆ", "", "よ"},
    {"ら", "り", "る", "れ", "ろ"},
    {"わ", "", "", "", "を"},
}};

constexpr const char* kN = "ん";

// Gaps fall back to the bare vowel kana.
const std::array<const char*, 5> kBareVowel = {"あ", "い", "う", "え", "お"};

const std::map<std::string, std::string>& small_forms() {
  static const std::map<std::string, std::string> m = {
      {"あ", "ぁ"}, {"い", "ぃ"}, {"う", "ぅ"}, {"え", "ぇ"}, {"お", "ぉ"}, {"つ", "っ"},
      {"や", "ゃ"}, {"ゆ", "ゅ"}, {"よ", "ょ"}, {"わ", "ゎ"}};
  return m;
}

const std::set<std::string>& i_column() {
  static const std::set<std::string> s = {"き", "し", "ち", "に", "ひ", "み", "り",
                                          "ぎ", "じ", "ぢ", "び", "ぴ"};
  return s;
}

// Voicing cycles: period 2 for k/s/t rows, 3 for the h row.
const std::vector<std::vector<std::string>>& voicing_cycles() {
  static const std::vector<std::vector<std::string>> c = {
      {"か", "が"}, {"き", "ぎ"}, {"く", "ぐ"}, {"け", "げ"}, {"こ", "ご"},
      {"さ", "ざ"}, {"し", "じ"}, {"す", "ず"}, {"せ", "ぜ"}, {"そ", "ぞ"},
      {"た", "だ"}, {"ち", "ぢ"}, {"つ", "づ"}, {"て", "で"}, {"と", "ど"},
      {"は", "ば", "ぱ"}, {"ひ", "び", "ぴ"}, {"ふ", "ぶ", "ぷ"}, {"へ", "べ", "ぺ"}, {"ほ", "ぼ", "ぽ"}};
  return c;
}

const std::map<std::string, std::string>& romaji_table() {
  static const std::map<std::string, std::string> m = [] {
    std::map<std::string, std::string> t;
    const std::array<const char*, kRowCount> consonant = {"", "k", "s", "t", "n", "h", "m", "y", "r", "w"};
    const std::array<const char*, 5> vowels = {"a", "i", "u", "e", "o"};
    for (int r = 0; r < kRowCount; ++r) {
      for (int v = 0; v < 5; ++v) {
        if (*kChart[r][v]) t[kChart[r][v]] = std::string(consonant[r]) + vowels[v];
      }
    }
    t["し"] = "shi";
    t["ち"] = "chi";
    t["つ"] = "tsu";
    t["ふ"] = "fu";
    t[kN] = "n";
    const std::map<std::string, std::string> voiced = {
        {"が", "ga"}, {"ぎ", "gi"}, {"ぐ", "gu"}, {"げ", "ge"}, {"ご", "go"}, {"ざ", "za"}, {"じ", "ji"},
        {"ず", "zu"}, {"ぜ", "ze"}, {"ぞ", "zo"}, {"だ", "da"}, {"ぢ", "ji"}, {"づ", "zu"}, {"で", "de"},
        {"ど", "do"}, {"ば", "ba"}, {"び", "bi"}, {"ぶ", "bu"}, {"べ", "be"}, {"ぼ", "bo"}, {"ぱ", "pa"},
        {"ぴ", "pi"}, {"ぷ", "pu"}, {"ぺ", "pe"}, {"ぽ", "po"}};
    t.insert(voiced.begin(), voiced.end());
    for (const auto& [base, small] : small_forms()) t[small] = "x" + t[base];
    return t;
  }();
  return m;
}

const std::array<std::string, 8> kLetters = {"abc", "def", "ghi", "jkl", "mno", "pqrs", "tuv", "wxyz"};

std::string cell(KanaRow row, Vowel v) {
  const char* k = kChart[static_cast<int>(row)][static_cast<int>(v)];
  return *k ? k : kBareVowel[static_cast<int>(v)];
}

char key_for_row(const KanaLayout& layout, KanaRow row) {
  for (const auto& [key, r] : layout.rows) {
    if (r == row) return key;
  }
  throw DataError("layout has no key for a kana row");
}

// Replaces the final code point of |text| (which must equal |old_kana|).
void replace_last(std::string& text, const std::string& old_kana, const std::string& new_kana) {
  if (text.size() >= old_kana.size() && text.compare(text.size() - old_kana.size(), old_kana.size(), old_kana) == 0) {
    text.resize(text.size() - old_kana.size());
    text += new_kana;
  }
}

std::pair<char, int> multitap_keying(char letter) {
  for (std::size_t k = 0; k < kLetters.size(); ++k) {
    const auto pos = kLetters[k].find(letter);
    if (pos != std::string::npos) return {static_cast<char>('2' + k), static_cast<int>(pos) + 1};
  }
  throw DataError(std::string("no keypad letter for '") + letter + "'");
}

// Kana multi-tap: the row's kana in press order.
std::vector<std::string> multitap_cycle(KanaRow row) {
  std::vector<std::string> out;
  for (int v = 0; v < 5; ++v) {
    const char* k = kChart[static_cast<int>(row)][v];
    if (*k) out.emplace_back(k);
  }
  if (row == KanaRow::W) out.emplace_back(kN);
  return out;
}

std::optional<KanaRow> row_for_key(const KanaLayout& layout, char key) {
  auto it = layout.rows.find(key);
  if (it == layout.rows.end()) return std::nullopt;
  return it->second;
}

}  // namespace

bool is_keypad_key(char key) { return (key >= '0' && key <= '9') || key == '*' || key == '#'; }

KanaLayout KanaLayout::standard() {
  KanaLayout l;
  l.rows = {{'1', KanaRow::Vowel}, {'2', KanaRow::K}, {'3', KanaRow::S}, {'4', KanaRow::T}, {'5', KanaRow::N},
            {'6', KanaRow::H},     {'7', KanaRow::M}, {'8', KanaRow::Y}, {'9', KanaRow::R}, {'0', KanaRow::W}};
  return l;
}

void KanaLayout::validate() const {
  std::array<int, kRowCount> seen{};
  for (const auto& [key, row] : rows) {
    if (!is_keypad_key(key) || key == dakuten_key || key == small_key) {
      throw DataError(std::string("invalid row key '") + key + "'");
    }
    ++seen[static_cast<int>(row)];
  }
  if (std::any_of(seen.begin(), seen.end(), [](int n) { return n != 1; })) {
    throw DataError("every kana row must be reachable from exactly one key");
  }
  if (dakuten_key == small_key) throw DataError("modifier keys must differ");
}

ComposeResult kana_compose(const KeyEvent& key, std::optional<Vowel> vowel, const ComposerState& state,
                           const KanaLayout& layout) {
  if (!is_keypad_key(key.key)) throw ContractViolation(std::string("not a keypad key: '") + key.key + "'");
  const auto row = row_for_key(layout, key.key);
  if (!row) throw ContractViolation(std::string("kana_compose needs a consonant-row key, got '") + key.key + "'");

  ComposeResult out;
  out.state = state;
  std::string kana;
  if (!vowel) {
    if (*row != KanaRow::W || !layout.n_on_closed_zero) return out;
    kana = kN;
  } else {
    kana = cell(*row, *vowel);
  }

  if (state.pending_small) {
    auto it = small_forms().find(kana);
    if (it != small_forms().end()) {
      const bool is_y_small = *row == KanaRow::Y && (kana == "や" || kana == "ゆ" || kana == "よ");
      out.yoon = is_y_small && state.last_emitted && i_column().count(*state.last_emitted) > 0;
      kana = it->second;
    }
  }
  out.text = kana;
  out.state.last_emitted = kana;
  out.state.pending_small = false;
  return out;
}

DakutenResult apply_dakuten(const ComposerState& state) {
  DakutenResult out;
  out.state = state;
  if (!state.last_emitted) {
    out.warning = true;
    return out;
  }
  const std::string& last = *state.last_emitted;
  out.replacement = last;
  for (const auto& cycle : voicing_cycles()) {
    auto it = std::find(cycle.begin(), cycle.end(), last);
    if (it == cycle.end()) continue;
    ++it;
    out.replacement = it == cycle.end() ? cycle.front() : *it;
    break;
  }
  out.state.last_emitted = out.replacement;
  return out;
}

ComposerState toggle_small(const ComposerState& state) {
  ComposerState s = state;
  s.pending_small = !s.pending_small;
  return s;
}

const std::string& letters_on_key(char key) {
  if (key < '2' || key > '9') throw ContractViolation(std::string("letter keys are 2..9, got '") + key + "'");
  return kLetters[key - '2'];
}

std::optional<char> roman_select(const KeyEvent& key, MouthState mouth) {
  const std::string& letters = letters_on_key(key.key);
  switch (mouth) {
    case MouthState::Closed: return letters[0];
    case MouthState::SlightlyOpen: return letters[1];
    case MouthState::Open: return letters[2];
    case MouthState::Pucker:
      if (letters.size() == 4) return letters[3];
      return std::nullopt;
  }
  return std::nullopt;
}

char multitap(const KeyEvent& key, int press_count) {
  const std::string& letters = letters_on_key(key.key);
  if (press_count < 1) throw ContractViolation("press_count must be >= 1");
  return letters[(press_count - 1) % letters.size()];
}

std::optional<char> MultiTapDecoder::press(const KeyEvent& key) {
  std::optional<char> committed;
  if (pending_ && pending_->key == key.key && key.t_ms - pending_->t_ms <= timeout_ms_) {
    ++count_;
    pending_ = key;
    return std::nullopt;
  }
  committed = flush();
  letters_on_key(key.key);
  pending_ = key;
  count_ = 1;
  return committed;
}

std::optional<char> MultiTapDecoder::flush() {
  if (!pending_) return std::nullopt;
  const char c = multitap(*pending_, count_);
  pending_.reset();
  count_ = 0;
  return c;
}

void to_json(nlohmann::json& j, const EntryEvent& e) {
  j = nlohmann::json::object();
  j["t_ms"] = e.t_ms;
  if (e.key) j["key"] = std::string(1, *e.key);
  if (e.mouth) j["mouth"] = mapping::to_string(*e.mouth);
  if (e.vowel) j["vowel"] = mapping::to_string(*e.vowel);
  if (e.emitted) j["emitted"] = *e.emitted;
}

void from_json(const nlohmann::json& j, EntryEvent& e) {
  e = EntryEvent{};
  e.t_ms = j.at("t_ms").get<std::int64_t>();
  if (j.contains("key") && !j["key"].is_null()) {
    const auto k = j["key"].get<std::string>();
    if (k.size() != 1 || !is_keypad_key(k[0])) throw DataError("invalid key \"" + k + "\"");
    e.key = k[0];
  }
  if (j.contains("mouth") && !j["mouth"].is_null()) e.mouth = mapping::mouth_state_from_string(j["mouth"].get<std::string>());
  if (j.contains("vowel") && !j["vowel"].is_null()) e.vowel = mapping::vowel_from_string(j["vowel"].get<std::string>());
  if (j.contains("emitted") && !j["emitted"].is_null()) e.emitted = j["emitted"].get<std::string>();
}

std::vector<std::string> utf8_split(const std::string& s) {
  std::vector<std::string> out;
  for (std::size_t i = 0; i < s.size();) {
    const auto c = static_cast<unsigned char>(s[i]);
    const std::size_t len = c < 0x80 ? 1 : (c >> 5) == 0x6 ? 2 : (c >> 4) == 0xE ? 3 : (c >> 3) == 0x1E ? 4 : 1;
    out.push_back(s.substr(i, len));
    i += len;
  }
  return out;
}

std::size_t utf8_length(const std::string& s) {
  return static_cast<std::size_t>(
      std::count_if(s.begin(), s.end(), [](char c) { return (static_cast<unsigned char>(c) & 0xC0) != 0x80; }));
}

double kspc(const EntryLog& log) {
  const std::size_t chars = utf8_length(log.transcript);
  if (chars == 0) throw ContractViolation("kspc needs a non-empty transcript");
  const auto presses = std::count_if(log.events.begin(), log.events.end(), [](const auto& e) { return e.key.has_value(); });
  if (presses == 0) throw ContractViolation("transcript is not derivable from an empty key log");
  return static_cast<double>(presses) / static_cast<double>(chars);
}

double entry_speed(const EntryLog& log) {
  if (log.events.size() < 2) throw DomainError("entry speed needs at least two timestamped events");
  const auto [lo, hi] = std::minmax_element(log.events.begin(), log.events.end(),
                                            [](const auto& a, const auto& b) { return a.t_ms < b.t_ms; });
  const double minutes = static_cast<double>(hi->t_ms - lo->t_ms) / 60000.0;
  if (!(minutes > 0.0)) throw DomainError("entry speed is undefined for zero elapsed time");
  return (static_cast<double>(utf8_length(log.transcript)) / 5.0) / minutes;
}

EntryLog replay_kana(std::vector<EntryEvent> events, const KanaLayout& layout) {
  EntryLog log;
  ComposerState state;
  for (auto& e : events) {
    e.emitted.reset();
    if (!e.key) continue;
    if (*e.key == layout.dakuten_key) {
      const auto previous = state.last_emitted;
      auto r = apply_dakuten(state);
      if (!r.warning) {
        replace_last(log.transcript, *previous, r.replacement);
        e.emitted = r.replacement;
      }
      state = r.state;
    } else if (*e.key == layout.small_key) {
      state = toggle_small(state);
    } else {
      auto r = kana_compose({*e.key, e.t_ms}, e.vowel, state, layout);
      state = r.state;
      if (!r.text.empty()) {
        log.transcript += r.text;
        e.emitted = r.text;
      }
    }
  }
  log.events = std::move(events);
  return log;
}

EntryLog replay_roman(std::vector<EntryEvent> events) {
  EntryLog log;
  for (auto& e : events) {
    e.emitted.reset();
    if (!e.key) continue;
    const auto letter = roman_select({*e.key, e.t_ms}, e.mouth.value_or(MouthState::Closed));
    if (letter) {
      log.transcript += *letter;
      e.emitted = std::string(1, *letter);
    }
  }
  log.events = std::move(events);
  return log;
}

EntryLog replay_multitap_roman(std::vector<EntryEvent> events, std::int64_t commit_timeout_ms) {
  EntryLog log;
  MultiTapDecoder decoder(commit_timeout_ms);
  EntryEvent* pending_event = nullptr;
  for (auto& e : events) {
    e.emitted.reset();
    if (!e.key) continue;
    if (auto c = decoder.press({*e.key, e.t_ms})) {
      log.transcript += *c;
      if (pending_event) pending_event->emitted = std::string(1, *c);
    }
    pending_event = &e;
  }
  if (auto c = decoder.flush()) {
    log.transcript += *c;
    if (pending_event) pending_event->emitted = std::string(1, *c);
  }
  log.events = std::move(events);
  return log;
}

EntryLog replay_multitap_kana(std::vector<EntryEvent> events, std::int64_t commit_timeout_ms,
                              const KanaLayout& layout) {
  EntryLog log;
  std::optional<KeyEvent> pending;
  int count = 0;
  ComposerState state;
  EntryEvent* pending_event = nullptr;

  auto commit = [&] {
    if (!pending) return;
    const auto cycle = multitap_cycle(*row_for_key(layout, pending->key));
    const std::string kana = cycle[(count - 1) % cycle.size()];
    log.transcript += kana;
    state.last_emitted = kana;
    if (pending_event) pending_event->emitted = kana;
    pending.reset();
    count = 0;
  };

  for (auto& e : events) {
    e.emitted.reset();
    if (!e.key) continue;
    const char k = *e.key;
    if (k == layout.dakuten_key || k == layout.small_key) {
      commit();
      if (!state.last_emitted) continue;
      const std::string previous = *state.last_emitted;
      std::string replacement = previous;
      if (k == layout.dakuten_key) {
        replacement = apply_dakuten(state).replacement;
      } else if (auto it = small_forms().find(previous); it != small_forms().end()) {
        replacement = it->second;
      }
      replace_last(log.transcript, previous, replacement);
      state.last_emitted = replacement;
      e.emitted = replacement;
      continue;
    }
    if (!row_for_key(layout, k)) throw ContractViolation(std::string("not a kana row key: '") + k + "'");
    if (pending && pending->key == k && e.t_ms - pending->t_ms <= commit_timeout_ms) {
      ++count;
      pending = KeyEvent{k, e.t_ms};
      pending_event = &e;
      continue;
    }
    commit();
    pending = KeyEvent{k, e.t_ms};
    pending_event = &e;
    count = 1;
  }
  commit();
  log.events = std::move(events);
  return log;
}

std::vector<std::string> base_gojuon() {
  std::vector<std::string> out;
  for (const auto& row : kChart) {
    for (const char* k : row) {
      if (*k) out.emplace_back(k);
    }
  }
  return out;
}

std::optional<KanaKeying> keying_for(const std::string& kana, const KanaLayout& layout) {
  if (kana == kN) return KanaKeying{key_for_row(layout, KanaRow::W), std::nullopt, 0, false};
  for (int r = 0; r < kRowCount; ++r) {
    for (int v = 0; v < 5; ++v) {
      if (kana == kChart[r][v]) {
        return KanaKeying{key_for_row(layout, static_cast<KanaRow>(r)), static_cast<Vowel>(v), 0, false};
      }
    }
  }
  for (const auto& cycle : voicing_cycles()) {
    for (std::size_t i = 1; i < cycle.size(); ++i) {
      if (cycle[i] == kana) {
        auto base = keying_for(cycle.front(), layout);
        base->dakuten_presses = static_cast<int>(i);
        return base;
      }
    }
  }
  for (const auto& [base, small] : small_forms()) {
    if (small == kana) {
      auto k = keying_for(base, layout);
      k->small = true;
      return k;
    }
  }
  return std::nullopt;
}

std::string romaji(const std::string& kana) {
  std::string out;
  for (const auto& ch : utf8_split(kana)) {
    auto it = romaji_table().find(ch);
    if (it == romaji_table().end()) throw DataError("no romanization for \"" + ch + "\"");
    out += it->second;
  }
  return out;
}

std::vector<EntryEvent> mouthtype_kana_events(const std::string& text, std::int64_t interval_ms,
                                              const KanaLayout& layout) {
  std::vector<EntryEvent> events;
  std::int64_t t = 0;
  auto push = [&](char key, std::optional<Vowel> vowel) {
    EntryEvent e;
    e.t_ms = t;
    e.key = key;
    e.vowel = vowel;
    events.push_back(e);
    t += interval_ms;
  };
  for (const auto& ch : utf8_split(text)) {
    const auto k = keying_for(ch, layout);
    if (!k) throw DataError("no keying for \"" + ch + "\"");
    if (k->small) push(layout.small_key, std::nullopt);
    push(k->key, k->vowel);
    for (int i = 0; i < k->dakuten_presses; ++i) push(layout.dakuten_key, std::nullopt);
  }
  return events;
}

std::vector<EntryEvent> multitap_kana_events(const std::string& text, std::int64_t interval_ms,
                                             std::int64_t commit_timeout_ms, const KanaLayout& layout) {
  std::vector<EntryEvent> events;
  std::int64_t t = 0;
  std::optional<char> last_key;
  auto push = [&](char key) {
    EntryEvent e;
    e.t_ms = t;
    e.key = key;
    events.push_back(e);
    t += interval_ms;
  };
  for (const auto& ch : utf8_split(text)) {
    auto k = keying_for(ch, layout);
    if (!k) throw DataError("no keying for \"" + ch + "\"");
    const KanaRow row = *row_for_key(layout, k->key);
    const auto cycle = multitap_cycle(row);
    std::string base = ch;
    if (k->small || k->dakuten_presses > 0) {
      base = k->vowel ? cell(row, *k->vowel) : std::string(kN);
    }
    const auto pos = std::find(cycle.begin(), cycle.end(), base);
    if (pos == cycle.end()) throw DataError("no multi-tap keying for \"" + ch + "\"");
    if (last_key == k->key) t += commit_timeout_ms;
    const int presses = static_cast<int>(pos - cycle.begin()) + 1;
    for (int i = 0; i < presses; ++i) push(k->key);
    last_key = k->key;
    for (int i = 0; i < k->dakuten_presses; ++i) push(layout.dakuten_key);
    if (k->small) push(layout.small_key);
    if (k->small || k->dakuten_presses > 0) last_key.reset();
  }
  return events;
}

std::vector<EntryEvent> mouthtype_roman_events(const std::string& text, std::int64_t interval_ms) {
  std::vector<EntryEvent> events;
  std::int64_t t = 0;
  for (char c : text) {
    const auto [key, presses] = multitap_keying(c);
    EntryEvent e;
    e.t_ms = t;
    e.key = key;
    e.mouth = presses == 4 ? MouthState::Pucker : static_cast<MouthState>(presses - 1);
    events.push_back(e);
    t += interval_ms;
  }
  return events;
}

std::vector<EntryEvent> multitap_roman_events(const std::string& text, std::int64_t interval_ms,
                                              std::int64_t commit_timeout_ms) {
  std::vector<EntryEvent> events;
  std::int64_t t = 0;
  std::optional<char> last_key;
  for (char c : text) {
    const auto [key, presses] = multitap_keying(c);
    if (last_key == key) t += commit_timeout_ms;
    for (int i = 0; i < presses; ++i) {
      EntryEvent e;
      e.t_ms = t;
      e.key = key;
      events.push_back(e);
      t += interval_ms;
    }
    last_key = key;
  }
  return events;
}

}  // namespace facegest::textentry
