#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <limits>
#include <map>
#include <set>
#include <string>
#include <string_view>
#include <vector>

#include "notefeat/score.hpp"
#include "notefeat/text.hpp"

namespace notefeat {

// Ordered map so iteration is lexicographic by construction.
using FeatureMap = std::map<std::string, double>;

namespace feature_detail {

inline double nan() { return std::numeric_limits<double>::quiet_NaN(); }

inline double mean(const std::vector<double>& v) {
    if (v.empty()) return nan();
    double s = 0;
    for (double x : v) s += x;
    return s / static_cast<double>(v.size());
}

inline double population_std(const std::vector<double>& v) {
    if (v.empty()) return nan();
    double m = mean(v);
    double s = 0;
    for (double x : v) s += (x - m) * (x - m);
    return std::sqrt(s / static_cast<double>(v.size()));
}

// Krumhansl key profiles (tonal hierarchy ratings), index 0 = tonic.
inline constexpr std::array<double, 12> kMajorProfile = {
    6.35, 2.23, 3.48, 2.33, 4.38, 4.09, 2.52, 5.19, 2.39, 3.66, 2.29, 2.88};
inline constexpr std::array<double, 12> kMinorProfile = {
    6.33, 2.68, 3.52, 5.38, 2.60, 3.53, 2.54, 4.75, 3.98, 2.69, 3.34, 3.17};

inline double pearson(const std::array<double, 12>& x, const std::array<double, 12>& y) {
    double mx = 0, my = 0;
    for (int i = 0; i < 12; ++i) { mx += x[i]; my += y[i]; }
    mx /= 12; my /= 12;
    double num = 0, dx = 0, dy = 0;
    for (int i = 0; i < 12; ++i) {
        num += (x[i] - mx) * (y[i] - my);
        dx += (x[i] - mx) * (x[i] - mx);
        dy += (y[i] - my) * (y[i] - my);
    }
    if (dx <= 0 || dy <= 0) return nan();
    return num / std::sqrt(dx * dy);
}

// part-name -> instrument class; longest matching substring wins, earlier
// table rows break length ties
struct InstrumentPattern { const char* pattern; const char* instrument; };
inline constexpr InstrumentPattern kInstrumentTable[] = {
    {"voice", "voice"},       {"soprano", "voice"},      {"alto", "voice"},
    {"tenor", "voice"},       {"bass", "voice"},         {"violin", "violin"},
    {"violino", "violin"},    {"viola", "viola"},        {"cello", "cello"},
    {"violoncello", "cello"}, {"contrabass", "contrabass"}, {"bass", "contrabass"},
    {"flute", "flute"},       {"flauto", "flute"},       {"oboe", "oboe"},
    {"clarinet", "clarinet"}, {"bassoon", "bassoon"},    {"fagotto", "bassoon"},
    {"horn", "horn"},         {"corno", "horn"},         {"trumpet", "trumpet"},
    {"tromba", "trumpet"},    {"piano", "keyboard"},     {"cembalo", "keyboard"},
    {"harpsichord", "keyboard"}, {"organ", "keyboard"}};

inline constexpr const char* kInstrumentNames[] = {
    "voice", "violin", "viola", "cello", "contrabass", "flute", "oboe",
    "clarinet", "bassoon", "horn", "trumpet", "keyboard", "other"};

inline std::string classify_part_name(const std::string& name) {
    std::string lower = to_lower(name);
    const char* best = "other";
    std::size_t best_len = 0;
    for (const auto& row : kInstrumentTable) {
        std::string_view pat = row.pattern;
        if (pat.size() > best_len && lower.find(pat) != std::string::npos) {
            best = row.instrument;
            best_len = pat.size();
        }
    }
    return best;
}

// Melodic line per part: simultaneous (equal-onset) notes reduce to the
// highest pitch; grace notes are left out of the reduction. Notes are sorted
// by (onset, pitch), so one linear pass suffices.
inline std::vector<int> melodic_intervals(const Part& part) {
    std::vector<int> intervals;
    const Rational* group_onset = nullptr;
    int group_top = 0;
    int prev = -1;
    bool have_prev = false;
    auto close_group = [&]() {
        if (!group_onset) return;
        if (have_prev) intervals.push_back(group_top - prev);
        prev = group_top;
        have_prev = true;
    };
    for (const auto& n : part.notes) {
        if (n.grace) continue;
        if (group_onset && *group_onset == n.onset) {
            group_top = std::max(group_top, n.midi_pitch);
            continue;
        }
        close_group();
        group_onset = &n.onset;
        group_top = n.midi_pitch;
    }
    close_group();
    return intervals;
}

// prefilled map of NaNs over a sorted name list
inline FeatureMap nan_map(const std::vector<std::string>& names) {
    FeatureMap out;
    for (const auto& name : names) out.emplace_hint(out.end(), name, nan());
    return out;
}

} // namespace feature_detail

// ---------------------------------------------------------------------------
// pitch statistics

inline const std::vector<std::string>& pitch_feature_names() {
    static const std::vector<std::string> names = [] {
        std::vector<std::string> v = {"Pitch_Count",  "Pitch_Mean", "Pitch_Std",
                                      "Pitch_Min",    "Pitch_Max",  "Pitch_Range",
                                      "Pitch_DistinctCount", "PC_Entropy"};
        for (int i = 0; i < 12; ++i) v.push_back("PC_Hist_" + std::to_string(i));
        std::sort(v.begin(), v.end());
        return v;
    }();
    return names;
}

inline FeatureMap pitch_features(const Score& score) {
    using namespace feature_detail;
    FeatureMap out = nan_map(pitch_feature_names());

    std::vector<double> pitches;
    std::array<double, 12> pc_count{};
    std::set<int> distinct;
    for (const auto& part : score.parts)
        for (const auto& n : part.notes) {
            pitches.push_back(n.midi_pitch);
            pc_count[((n.midi_pitch % 12) + 12) % 12] += 1;
            distinct.insert(n.midi_pitch);
        }

    out["Pitch_Count"] = static_cast<double>(pitches.size());
    if (pitches.empty()) return out;

    out["Pitch_Mean"] = mean(pitches);
    out["Pitch_Std"] = population_std(pitches);
    auto [mn, mx] = std::minmax_element(pitches.begin(), pitches.end());
    out["Pitch_Min"] = *mn;
    out["Pitch_Max"] = *mx;
    out["Pitch_Range"] = *mx - *mn;
    out["Pitch_DistinctCount"] = static_cast<double>(distinct.size());

    double n = static_cast<double>(pitches.size());
    double entropy = 0;
    for (int i = 0; i < 12; ++i) {
        double p = pc_count[i] / n;
        out["PC_Hist_" + std::to_string(i)] = p;
        if (p > 0) entropy -= p * std::log2(p);
    }
    out["PC_Entropy"] = entropy;
    return out;
}

// ---------------------------------------------------------------------------
// melodic intervals

inline const std::vector<std::string>& interval_feature_names() {
    static const std::vector<std::string> names = [] {
        std::vector<std::string> v = {"Interval_MeanAbs",     "Interval_Std",
                                      "Interval_StepRatio",   "Interval_LeapRatio",
                                      "Interval_RepeatRatio", "Interval_AscendRatio",
                                      "Interval_Largest"};
        for (int m = -12; m <= 12; ++m)
            v.push_back(m < 0 ? "Interval_Hist_m" + std::to_string(-m)
                              : "Interval_Hist_" + std::to_string(m));
        std::sort(v.begin(), v.end());
        return v;
    }();
    return names;
}

inline FeatureMap melodic_interval_features(const Score& score) {
    using namespace feature_detail;
    FeatureMap out = nan_map(interval_feature_names());

    std::vector<int> pooled;
    for (const auto& part : score.parts) {
        auto iv = melodic_intervals(part);
        pooled.insert(pooled.end(), iv.begin(), iv.end());
    }
    if (pooled.empty()) return out;

    std::vector<double> as_double(pooled.begin(), pooled.end());
    std::vector<double> abs_vals;
    for (int i : pooled) abs_vals.push_back(std::abs(i));

    double n = static_cast<double>(pooled.size());
    int steps = 0, leaps = 0, repeats = 0, ups = 0, nonzero = 0, largest = 0;
    std::array<double, 25> hist{};
    for (int i : pooled) {
        int a = std::abs(i);
        if (a == 1 || a == 2) ++steps;
        if (a >= 5) ++leaps;
        if (i == 0) ++repeats;
        if (i != 0) ++nonzero;
        if (i > 0) ++ups;
        largest = std::max(largest, a);
        hist[static_cast<std::size_t>(std::clamp(i, -12, 12) + 12)] += 1;
    }

    out["Interval_MeanAbs"] = mean(abs_vals);
    out["Interval_Std"] = population_std(as_double);
    out["Interval_StepRatio"] = steps / n;
    out["Interval_LeapRatio"] = leaps / n;
    out["Interval_RepeatRatio"] = repeats / n;
    out["Interval_AscendRatio"] = nonzero > 0 ? ups / static_cast<double>(nonzero) : nan();
    out["Interval_Largest"] = largest;
    for (int m = -12; m <= 12; ++m) {
        std::string name = m < 0 ? "Interval_Hist_m" + std::to_string(-m)
                                 : "Interval_Hist_" + std::to_string(m);
        out[name] = hist[static_cast<std::size_t>(m + 12)] / n;
    }
    return out;
}

// ---------------------------------------------------------------------------
// vertical intervals

inline const std::vector<std::string>& vertical_feature_names() {
    static const std::vector<std::string> names = [] {
        std::vector<std::string> v = {"VInt_DissonanceRatio", "VInt_Count"};
        for (int i = 0; i < 12; ++i) v.push_back("VInt_Hist_" + std::to_string(i));
        std::sort(v.begin(), v.end());
        return v;
    }();
    return names;
}

inline FeatureMap vertical_interval_features(const Score& score) {
    using namespace feature_detail;
    FeatureMap out = nan_map(vertical_feature_names());
    if (score.parts.size() < 2) return out;

    // sweep over note boundaries; removals apply before additions so butt
    // joints (end == start) never overlap
    struct Event {
        Rational time;
        double approx; // to_double(time): cheap primary sort key
        bool add;
        int part;
        int pitch;
    };
    std::vector<Event> events;
    for (const auto& part : score.parts)
        for (const auto& n : part.notes) {
            if (n.grace) continue;
            Rational end = n.onset + n.duration;
            events.push_back({n.onset, n.onset.to_double(), true, part.index, n.midi_pitch});
            events.push_back({end, end.to_double(), false, part.index, n.midi_pitch});
        }
    std::stable_sort(events.begin(), events.end(), [](const Event& a, const Event& b) {
        if (a.approx != b.approx) return a.approx < b.approx;
        if (a.time != b.time) return a.time < b.time;
        return a.add < b.add; // removals first
    });

    // active (pitch, count) per part, kept sorted by pitch; these stay tiny
    std::vector<std::vector<std::pair<int, int>>> active(score.parts.size());
    for (auto& a : active) a.reserve(8);
    std::array<double, 12> mass{};
    long long pair_count = 0;
    double total_mass = 0;

    std::size_t i = 0;
    double now_approx = 0;
    bool first = true;
    auto accumulate = [&](double until_approx) {
        double dt = until_approx - now_approx;
        if (dt <= 0) return;
        for (std::size_t p = 0; p < active.size(); ++p) {
            if (active[p].empty()) continue;
            for (std::size_t q = p + 1; q < active.size(); ++q) {
                for (const auto& [pa, ca] : active[p])
                    for (const auto& [pb, cb] : active[q]) {
                        int cls = std::abs(pa - pb) % 12;
                        double w = dt * ca * cb;
                        mass[static_cast<std::size_t>(cls)] += w;
                        total_mass += w;
                    }
            }
        }
    };

    while (i < events.size()) {
        Rational t = events[i].time;
        if (!first) accumulate(events[i].approx);
        now_approx = events[i].approx;
        first = false;
        while (i < events.size() && events[i].time == t) {
            const Event& e = events[i];
            auto& own = active[static_cast<std::size_t>(e.part)];
            auto slot = std::lower_bound(own.begin(), own.end(), e.pitch,
                                         [](const auto& entry, int pitch) { return entry.first < pitch; });
            if (e.add) {
                for (std::size_t p = 0; p < active.size(); ++p) {
                    if (static_cast<int>(p) == e.part) continue;
                    for (const auto& [pitch, count] : active[p]) pair_count += count;
                }
                if (slot != own.end() && slot->first == e.pitch) ++slot->second;
                else own.insert(slot, {e.pitch, 1});
            } else {
                if (slot != own.end() && slot->first == e.pitch && --slot->second == 0)
                    own.erase(slot);
            }
            ++i;
        }
    }

    if (pair_count == 0 || total_mass <= 0) return out;
    double dissonant = 0;
    for (int cls : {1, 2, 6, 10, 11}) dissonant += mass[static_cast<std::size_t>(cls)];
    for (int c = 0; c < 12; ++c)
        out["VInt_Hist_" + std::to_string(c)] = mass[static_cast<std::size_t>(c)] / total_mass;
    out["VInt_DissonanceRatio"] = dissonant / total_mass;
    out["VInt_Count"] = static_cast<double>(pair_count);
    return out;
}

// ---------------------------------------------------------------------------
// rhythm

inline const std::vector<std::string>& rhythm_feature_names() {
    static const std::vector<std::string> names = [] {
        std::vector<std::string> v = {"NoteDensity", "Duration_Mean", "Duration_Std",
                                      "OffbeatRatio", "IOI_Mean",
                                      "Duration_Hist_025", "Duration_Hist_05",
                                      "Duration_Hist_1", "Duration_Hist_2", "Duration_Hist_4"};
        std::sort(v.begin(), v.end());
        return v;
    }();
    return names;
}

inline FeatureMap rhythm_features(const Score& score) {
    using namespace feature_detail;
    FeatureMap out = nan_map(rhythm_feature_names());

    static const char* bucket_names[5] = {"Duration_Hist_025", "Duration_Hist_05",
                                          "Duration_Hist_1", "Duration_Hist_2", "Duration_Hist_4"};

    std::vector<double> durations;
    std::array<double, 5> hist{};
    int offbeat = 0;
    int count = 0;
    std::vector<double> iois;

    auto measure_at = [&](int index) -> const Measure* {
        std::size_t slot = static_cast<std::size_t>(index - 1);
        if (slot < score.measure_map.size() && score.measure_map[slot].index == index)
            return &score.measure_map[slot];
        for (const auto& mm : score.measure_map)
            if (mm.index == index) return &mm;
        return nullptr;
    };

    for (const auto& part : score.parts) {
        const Rational* prev_onset = nullptr;
        for (const auto& n : part.notes) {
            if (n.grace) continue;
            ++count;
            double d = n.duration.to_double();
            durations.push_back(d);

            // nearest bucket in log2 space, ties to the larger bucket
            double x = std::clamp(std::log2(d), -2.0, 2.0);
            int best = 0;
            double best_dist = std::abs(x - (-2.0));
            for (int b = 1; b < 5; ++b) {
                double dist = std::abs(x - (b - 2.0));
                if (dist <= best_dist) { best = b; best_dist = dist; }
            }
            hist[static_cast<std::size_t>(best)] += 1;

            if (const Measure* m = measure_at(n.measure_index)) {
                Rational offset = n.onset - m->start;
                if (!offset.is_integer()) ++offbeat;
            }
            // notes are sorted by onset, so consecutive distinct onsets come free
            if (prev_onset && *prev_onset != n.onset)
                iois.push_back((n.onset - *prev_onset).to_double());
            prev_onset = &n.onset;
        }
    }

    if (count == 0) return out;
    double span = total_span(score).to_double();
    out["NoteDensity"] = span > 0 ? count / span : nan();
    out["Duration_Mean"] = mean(durations);
    out["Duration_Std"] = population_std(durations);
    for (int b = 0; b < 5; ++b)
        out[bucket_names[b]] = hist[static_cast<std::size_t>(b)] / static_cast<double>(count);
    out["OffbeatRatio"] = offbeat / static_cast<double>(count);
    out["IOI_Mean"] = iois.empty() ? nan() : mean(iois);
    return out;
}

// ---------------------------------------------------------------------------
// dynamics and tempo (notation-based and MIDI-parameter-based kept apart)

inline const std::vector<std::string>& dynamics_tempo_feature_names() {
    static const std::vector<std::string> names = [] {
        std::vector<std::string> v = {"Dyn_Count",        "Dyn_MeanLevel", "Dyn_ChangesPerMeasure",
                                      "Tempo_NumericMean", "Tempo_EventCount",
                                      "Velocity_Mean",     "Velocity_Std",  "MidiTempo_MeanBpm"};
        std::sort(v.begin(), v.end());
        return v;
    }();
    return names;
}

inline FeatureMap dynamics_tempo_features(const Score& score) {
    using namespace feature_detail;
    FeatureMap out = nan_map(dynamics_tempo_feature_names());

    std::vector<double> levels;
    for (const auto& d : score.dynamic_events) levels.push_back(static_cast<double>(d.mark));
    out["Dyn_Count"] = static_cast<double>(levels.size());
    if (!levels.empty()) out["Dyn_MeanLevel"] = mean(levels);
    int changes = 0;
    for (std::size_t i = 1; i < levels.size(); ++i)
        if (levels[i] != levels[i - 1]) ++changes;
    double measures = static_cast<double>(score.measure_map.size());
    out["Dyn_ChangesPerMeasure"] = measures > 0 ? changes / measures : nan();

    std::vector<double> notation_bpm, midi_bpm;
    for (const auto& t : score.tempo_events) {
        if (t.source == TempoSource::midi_meta) midi_bpm.push_back(t.bpm);
        else notation_bpm.push_back(t.bpm);
    }
    out["Tempo_EventCount"] = static_cast<double>(notation_bpm.size());
    if (!notation_bpm.empty()) out["Tempo_NumericMean"] = mean(notation_bpm);
    if (!midi_bpm.empty()) out["MidiTempo_MeanBpm"] = mean(midi_bpm);

    std::vector<double> velocities;
    for (const auto& part : score.parts)
        for (const auto& n : part.notes)
            if (n.velocity) velocities.push_back(static_cast<double>(*n.velocity));
    if (!velocities.empty()) {
        out["Velocity_Mean"] = mean(velocities);
        out["Velocity_Std"] = population_std(velocities);
    }
    return out;
}

// ---------------------------------------------------------------------------
// texture and density

inline const std::vector<std::string>& texture_feature_names() {
    static const std::vector<std::string> names = [] {
        std::vector<std::string> v = {"Parts_Count", "Measures_Count", "Span_Quarters",
                                      "SimultaneityMean", "UpperPartNoteShare"};
        std::sort(v.begin(), v.end());
        return v;
    }();
    return names;
}

inline FeatureMap texture_density_features(const Score& score) {
    using namespace feature_detail;
    FeatureMap out = nan_map(texture_feature_names());

    out["Parts_Count"] = static_cast<double>(score.parts.size());
    out["Measures_Count"] = static_cast<double>(score.measure_map.size());
    Rational span = total_span(score);
    out["Span_Quarters"] = span.to_double();

    // time average of sounding_count over [0, span) equals the summed
    // sounding time divided by the span
    Rational sounding(0);
    long long total_notes = 0;
    for (const auto& part : score.parts)
        for (const auto& n : part.notes)
            if (!n.grace) { sounding += n.duration; ++total_notes; }
    if (span > Rational(0)) out["SimultaneityMean"] = sounding.to_double() / span.to_double();

    if (total_notes > 0) {
        int best_part = -1;
        double best_mean = 0;
        std::vector<long long> counts(score.parts.size(), 0);
        for (std::size_t p = 0; p < score.parts.size(); ++p) {
            double sum = 0;
            long long c = 0;
            for (const auto& n : score.parts[p].notes)
                if (!n.grace) { sum += n.midi_pitch; ++c; }
            counts[p] = c;
            if (c > 0) {
                double m = sum / static_cast<double>(c);
                if (best_part < 0 || m > best_mean) { best_part = static_cast<int>(p); best_mean = m; }
            }
        }
        if (best_part >= 0)
            out["UpperPartNoteShare"] =
                static_cast<double>(counts[static_cast<std::size_t>(best_part)]) /
                static_cast<double>(total_notes);
    }
    return out;
}

// ---------------------------------------------------------------------------
// instrumentation

inline const std::vector<std::string>& instrumentation_feature_names() {
    static const std::vector<std::string> names = [] {
        std::vector<std::string> v = {"Instr_DistinctCount", "Instr_Percussion"};
        for (int f = 0; f < 16; ++f) v.push_back("Instr_Family_" + std::to_string(f));
        for (const char* n : feature_detail::kInstrumentNames) v.push_back(std::string("Instr_") + n);
        std::sort(v.begin(), v.end());
        return v;
    }();
    return names;
}

inline FeatureMap instrumentation_features(const Score& score) {
    using namespace feature_detail;
    FeatureMap out = nan_map(instrumentation_feature_names());

    std::set<std::string> flags;
    if (score.source_format == SourceFormat::midi) {
        for (int f = 0; f < 16; ++f) out["Instr_Family_" + std::to_string(f)] = 0.0;
        out["Instr_Percussion"] = 0.0;
        for (const auto& part : score.parts) {
            if (part.percussion) {
                out["Instr_Percussion"] = 1.0;
                flags.insert("percussion");
                continue;
            }
            int family = part.midi_program.value_or(0) / 8; // General MIDI family
            std::string name = "Instr_Family_" + std::to_string(family);
            out[name] = 1.0;
            flags.insert(name);
        }
    } else {
        for (const char* n : kInstrumentNames) out[std::string("Instr_") + n] = 0.0;
        for (const auto& part : score.parts) {
            std::string instrument = classify_part_name(part.name);
            out["Instr_" + instrument] = 1.0;
            flags.insert(instrument);
        }
    }
    out["Instr_DistinctCount"] = static_cast<double>(flags.size());
    return out;
}

// ---------------------------------------------------------------------------
// key

inline const std::vector<std::string>& key_feature_names() {
    static const std::vector<std::string> names = [] {
        std::vector<std::string> v = {"KeySig_Fifths", "KS_TonicPC", "KS_Mode", "KS_Confidence"};
        std::sort(v.begin(), v.end());
        return v;
    }();
    return names;
}

// Krumhansl-Schmuckler key finding: correlate the duration-weighted pitch
// class vector against the 24 rotated profiles; highest correlation wins,
// ties prefer the lower tonic and major over minor.
inline FeatureMap key_features(const Score& score) {
    using namespace feature_detail;
    FeatureMap out = nan_map(key_feature_names());

    if (!score.key_signatures.empty())
        out["KeySig_Fifths"] = static_cast<double>(score.key_signatures.front().fifths);

    std::array<double, 12> weights{};
    double total = 0;
    for (const auto& part : score.parts)
        for (const auto& n : part.notes) {
            double w = n.duration.to_double();
            weights[static_cast<std::size_t>(((n.midi_pitch % 12) + 12) % 12)] += w;
            total += w;
        }
    if (total <= 0) return out;

    struct Candidate { double corr; int tonic; int mode; };
    std::vector<Candidate> candidates;
    for (int mode = 0; mode < 2; ++mode) {
        const auto& profile = mode == 0 ? kMajorProfile : kMinorProfile;
        for (int tonic = 0; tonic < 12; ++tonic) {
            std::array<double, 12> rotated{};
            for (int pc = 0; pc < 12; ++pc)
                rotated[static_cast<std::size_t>(pc)] =
                    profile[static_cast<std::size_t>(((pc - tonic) % 12 + 12) % 12)];
            double c = pearson(weights, rotated);
            if (std::isnan(c)) return out; // constant pitch-class vector: no inference
            candidates.push_back({c, tonic, mode});
        }
    }
    std::sort(candidates.begin(), candidates.end(), [](const Candidate& a, const Candidate& b) {
        if (a.corr != b.corr) return a.corr > b.corr;
        if (a.tonic != b.tonic) return a.tonic < b.tonic;
        return a.mode < b.mode;
    });
    out["KS_TonicPC"] = candidates[0].tonic;
    out["KS_Mode"] = candidates[0].mode;
    out["KS_Confidence"] = candidates[0].corr - candidates[1].corr;
    return out;
}

// ---------------------------------------------------------------------------
// lyrics

inline const std::vector<std::string>& lyrics_feature_names() {
    static const std::vector<std::string> names = [] {
        std::vector<std::string> v = {"Lyrics_Present", "Lyrics_SyllableCount",
                                      "Lyrics_DistinctWordCount"};
        std::sort(v.begin(), v.end());
        return v;
    }();
    return names;
}

inline FeatureMap lyrics_features(const Score& score) {
    using namespace feature_detail;
    FeatureMap out = nan_map(lyrics_feature_names());

    long long syllables = 0;
    std::set<std::string> words;
    for (const auto& part : score.parts) {
        std::string current;
        for (const auto& lyric : part.lyrics) {
            ++syllables;
            std::string s = lyric.syllable;
            bool continues = !s.empty() && s.back() == '-';
            if (continues) s.pop_back();
            current += s;
            if (!continues) {
                if (!current.empty()) words.insert(current);
                current.clear();
            }
        }
        if (!current.empty()) words.insert(current);
    }

    out["Lyrics_Present"] = syllables > 0 ? 1.0 : 0.0;
    if (syllables > 0) {
        out["Lyrics_SyllableCount"] = static_cast<double>(syllables);
        out["Lyrics_DistinctWordCount"] = static_cast<double>(words.size());
    }
    return out;
}

// ---------------------------------------------------------------------------
// harmony (from annotations)

inline const std::vector<std::string>& harmony_feature_names() {
    static const std::vector<std::string> names = [] {
        std::vector<std::string> v = {"Harm_Count",          "Harm_PerMeasure",
                                      "Harm_TonicRatio",     "Harm_DominantRatio",
                                      "Harm_DistinctLabels", "Harm_LocalKeyChanges"};
        std::sort(v.begin(), v.end());
        return v;
    }();
    return names;
}

inline FeatureMap harmony_features(const Score& score,
                                   const std::vector<HarmonicAnnotation>& annotations) {
    using namespace feature_detail;
    FeatureMap out = nan_map(harmony_feature_names());

    int measure_count = static_cast<int>(score.measure_map.size());
    std::vector<const HarmonicAnnotation*> valid;
    for (const auto& a : annotations)
        if (a.measure_index >= 1 && a.measure_index <= measure_count) valid.push_back(&a);
    if (valid.empty()) return out;

    auto leading_numeral = [](const std::string& label) {
        std::string run;
        for (char c : label) {
            if (c == 'i' || c == 'I' || c == 'v' || c == 'V') run.push_back(static_cast<char>(std::tolower(c)));
            else break;
        }
        return run;
    };

    long long tonic = 0, dominant = 0, key_changes = 0;
    std::set<std::string> labels;
    for (std::size_t k = 0; k < valid.size(); ++k) {
        const auto& a = *valid[k];
        std::string numeral = leading_numeral(a.label);
        if (numeral == "i") ++tonic;
        if (numeral == "v" || numeral == "vii") ++dominant;
        labels.insert(a.label);
        if (k > 0 && valid[k]->local_key != valid[k - 1]->local_key) ++key_changes;
    }

    double n = static_cast<double>(valid.size());
    out["Harm_Count"] = n;
    out["Harm_PerMeasure"] = measure_count > 0 ? n / measure_count : nan();
    out["Harm_TonicRatio"] = tonic / n;
    out["Harm_DominantRatio"] = dominant / n;
    out["Harm_DistinctLabels"] = static_cast<double>(labels.size());
    out["Harm_LocalKeyChanges"] = static_cast<double>(key_changes);
    return out;
}

} // namespace notefeat
