#pragma once

// Handcrafted conformance corpus (ten scores encodable as SMF, MusicXML and
// **kern) plus randomized score and corpus generators.

#include <random>
#include <string>
#include <vector>

#include "notefeat/score.hpp"
#include "support/test_scores.hpp"

namespace testscores {

using notefeat::SpelledPitch;

inline TestEvent note(const Rational& dur, char step, int alter, int octave) {
    return TestEvent{dur, {SpelledPitch{step, alter, octave}}, false, std::nullopt};
}
inline TestEvent rest(const Rational& dur) { return TestEvent{dur, {}, false, std::nullopt}; }
inline TestEvent chord(const Rational& dur, std::vector<SpelledPitch> pitches) {
    return TestEvent{dur, std::move(pitches), false, std::nullopt};
}
inline TestEvent tied_note(const Rational& dur, char step, int alter, int octave) {
    return TestEvent{dur, {SpelledPitch{step, alter, octave}}, true, std::nullopt};
}

// Ten scores covering chords, ties, rests, dotted and triplet rhythms,
// multiple parts, key and time signature changes.
inline std::vector<TestScore> conformance_corpus() {
    std::vector<TestScore> corpus;

    { // 1: single part, one measure of quarters (C major outline)
        TestScore s;
        s.title = "quarters";
        s.parts.push_back({"Melody", 0, {
            note(Rational(1), 'C', 0, 4), note(Rational(1), 'E', 0, 4),
            note(Rational(1), 'G', 0, 4), note(Rational(1), 'C', 0, 5)}});
        corpus.push_back(s);
    }
    { // 2: two parts, whole note against quarters
        TestScore s;
        s.title = "two-parts";
        s.parts.push_back({"Violino I", 40, {
            note(Rational(1), 'E', 0, 5), note(Rational(1), 'D', 0, 5),
            note(Rational(1), 'C', 0, 5), note(Rational(1), 'D', 0, 5)}});
        s.parts.push_back({"Violoncello", 42, {note(Rational(4), 'C', 0, 3)}});
        corpus.push_back(s);
    }
    { // 3: chords
        TestScore s;
        s.title = "chords";
        s.parts.push_back({"Piano", 0, {
            chord(Rational(2), {{'C', 0, 4}, {'E', 0, 4}, {'G', 0, 4}}),
            chord(Rational(2), {{'D', 0, 4}, {'F', 0, 4}, {'A', 0, 4}}),
            chord(Rational(4), {{'C', 0, 4}, {'E', 0, 4}, {'G', 0, 4}, {'C', 0, 5}})}});
        s.time_sigs = {{1, {4, 4}}};
        corpus.push_back(s);
    }
    { // 4: tie across a barline
        TestScore s;
        s.title = "tie";
        s.parts.push_back({"Voice", 52, {
            note(Rational(2), 'G', 0, 4), tied_note(Rational(2), 'A', 0, 4),
            note(Rational(1), 'A', 0, 4), note(Rational(3), 'F', 0, 4)}});
        corpus.push_back(s);
    }
    { // 5: rests and offbeats
        TestScore s;
        s.title = "rests";
        s.parts.push_back({"Flauto", 73, {
            rest(Rational(1, 2)), note(Rational(1, 2), 'D', 0, 5),
            rest(Rational(1)), note(Rational(1, 2), 'F', 1, 5),
            rest(Rational(1, 2)), note(Rational(1), 'A', 0, 5)}});
        corpus.push_back(s);
    }
    { // 6: dotted rhythms in 6/8
        TestScore s;
        s.title = "dotted";
        s.time_sigs = {{1, {6, 8}}};
        s.parts.push_back({"Oboe", 68, {
            note(Rational(3, 2), 'B', -1, 4), note(Rational(3, 4), 'A', 0, 4),
            note(Rational(3, 4), 'G', 0, 4),
            note(Rational(1, 2), 'F', 0, 4), note(Rational(1, 2), 'G', 0, 4),
            note(Rational(2), 'A', 0, 4)}});
        s.key = {{-2, false}};
        corpus.push_back(s);
    }
    { // 7: triplets (exact rationals across formats)
        TestScore s;
        s.title = "triplets";
        s.parts.push_back({"Clarinet", 71, {
            note(Rational(1, 3), 'C', 0, 5), note(Rational(1, 3), 'D', 0, 5),
            note(Rational(1, 3), 'E', 0, 5),
            note(Rational(1, 3), 'F', 0, 5), note(Rational(1, 3), 'E', 0, 5),
            note(Rational(1, 3), 'D', 0, 5),
            note(Rational(2), 'C', 0, 5)}});
        corpus.push_back(s);
    }
    { // 8: time signature change
        TestScore s;
        s.title = "meter-change";
        s.time_sigs = {{1, {4, 4}}, {2, {3, 4}}};
        s.parts.push_back({"Corno", 60, {
            note(Rational(2), 'C', 0, 4), note(Rational(2), 'G', 0, 4),
            note(Rational(1), 'E', 0, 4), note(Rational(1), 'F', 0, 4),
            note(Rational(1), 'G', 0, 4)}});
        corpus.push_back(s);
    }
    { // 9: minor key, accidentals, four parts
        TestScore s;
        s.title = "minor-quartet";
        s.key = {{0, true}};
        s.parts.push_back({"Soprano", 52, {
            note(Rational(2), 'A', 0, 4), note(Rational(2), 'G', 1, 4),
            note(Rational(4), 'A', 0, 4)}});
        s.parts.push_back({"Alto", 52, {
            note(Rational(2), 'E', 0, 4), note(Rational(2), 'E', 0, 4),
            note(Rational(4), 'E', 0, 4)}});
        s.parts.push_back({"Tenore", 52, {
            note(Rational(2), 'C', 0, 4), note(Rational(2), 'B', 0, 3),
            note(Rational(4), 'C', 0, 4)}});
        s.parts.push_back({"Basso", 52, {
            note(Rational(2), 'A', 0, 3), note(Rational(2), 'E', 0, 3),
            note(Rational(4), 'A', 0, 2)}});
        corpus.push_back(s);
    }
    { // 10: sixteenth runs over two measures in 2/4
        TestScore s;
        s.title = "sixteenths";
        s.time_sigs = {{1, {2, 4}}};
        TestPart part{"Violino II", 40, {}};
        const char steps[] = {'C', 'D', 'E', 'F', 'G', 'A', 'B', 'C'};
        for (int rep = 0; rep < 2; ++rep)
            for (int i = 0; i < 8; ++i)
                part.events.push_back(note(Rational(1, 4), steps[i], 0, i == 7 ? 5 : 4));
        s.parts.push_back(part);
        corpus.push_back(s);
    }
    return corpus;
}

// Random 4-part, 64-measure scores for the synthetic benchmark corpus.
inline TestScore random_benchmark_score(std::mt19937& rng, int parts = 4, int measures = 64) {
    TestScore s;
    s.title = "synthetic";
    s.bpm = 90 + static_cast<int>(rng() % 60);
    s.key = {{static_cast<int>(rng() % 15) - 7, (rng() % 2) == 1}};
    static const char steps[] = {'C', 'D', 'E', 'F', 'G', 'A', 'B'};
    for (int p = 0; p < parts; ++p) {
        TestPart part;
        part.name = "Part " + std::to_string(p + 1);
        part.midi_program = static_cast<int>(rng() % 128);
        int base_octave = 3 + p % 3;
        for (int m = 0; m < measures; ++m) {
            Rational left(4);
            while (left > Rational(0)) {
                std::uint32_t pick = rng() % 4;
                Rational dur = pick == 0 ? Rational(1) : Rational(1, pick == 3 ? 4 : 2);
                if (dur > left) dur = left;
                if (rng() % 8 == 0) {
                    part.events.push_back(rest(dur));
                } else {
                    char step = steps[rng() % 7];
                    int alter = (rng() % 8 == 0) ? ((rng() % 2) ? 1 : -1) : 0;
                    int octave = base_octave + static_cast<int>(rng() % 2);
                    part.events.push_back(note(dur, step, alter, octave));
                }
                left -= dur;
            }
        }
        s.parts.push_back(std::move(part));
    }
    return s;
}

// Random well-formed Score values (built through ScoreBuilder) for
// serialization and feature property tests.
inline notefeat::Score random_score(std::mt19937& rng) {
    using namespace notefeat;
    ScoreBuilder builder(static_cast<SourceFormat>(rng() % 3));
    int part_count = static_cast<int>(rng() % 4); // may be zero
    for (int p = 0; p < part_count; ++p) {
        Part& part = builder.add_part("part" + std::to_string(p));
        if (rng() % 2) part.midi_program = static_cast<int>(rng() % 128);
        part.percussion = (rng() % 8) == 0;
        int notes = static_cast<int>(rng() % 40);
        Rational at(0);
        for (int i = 0; i < notes; ++i) {
            NoteEvent n;
            static const std::int64_t dens[] = {1, 2, 3, 4, 6, 8, 12, 16};
            at += Rational(static_cast<std::int64_t>(rng() % 4), dens[rng() % 8]);
            n.onset = at;
            n.grace = (rng() % 10) == 0;
            n.duration = n.grace ? Rational(0)
                                 : Rational(1 + static_cast<std::int64_t>(rng() % 8), dens[rng() % 8]);
            n.midi_pitch = 24 + static_cast<int>(rng() % 72);
            if (rng() % 2) n.velocity = 1 + static_cast<int>(rng() % 127);
            if (rng() % 2) {
                // spelled pitch consistent with the midi pitch
                static const char steps[] = {'C', 'D', 'E', 'F', 'G', 'A', 'B'};
                static const int pcs[] = {0, 2, 4, 5, 7, 9, 11};
                int si = static_cast<int>(rng() % 7);
                int pc = ((n.midi_pitch % 12) + 12) % 12;
                int alter = pc - pcs[si];
                if (alter > 6) alter -= 12;
                if (alter < -6) alter += 12;
                if (alter >= -2 && alter <= 2) {
                    int octave = (n.midi_pitch - pcs[si] - alter) / 12 - 1;
                    SpelledPitch sp{steps[si], alter, octave};
                    if (sp.semitone() % 12 == n.midi_pitch % 12) n.spelled_pitch = sp;
                }
            }
            part.notes.push_back(n);
            if (!n.grace && rng() % 3 == 0) {
                Lyric lyric;
                lyric.onset = n.onset;
                lyric.syllable = (rng() % 3 == 0) ? "la-" : "la";
                part.lyrics.push_back(lyric);
            }
        }
    }
    int keysigs = static_cast<int>(rng() % 3);
    for (int i = 0; i < keysigs; ++i) {
        std::optional<bool> minor;
        if (rng() % 2) minor = (rng() % 2) == 1;
        builder.add_key_signature(Rational(static_cast<std::int64_t>(rng() % 32)),
                                  static_cast<int>(rng() % 15) - 7, minor);
    }
    int tempos = static_cast<int>(rng() % 3);
    for (int i = 0; i < tempos; ++i)
        builder.add_tempo(Rational(static_cast<std::int64_t>(rng() % 32)),
                          40.0 + static_cast<double>(rng() % 160),
                          static_cast<TempoSource>(rng() % 3));
    int dynamics = static_cast<int>(rng() % 4);
    for (int i = 0; i < dynamics; ++i)
        builder.add_dynamic(Rational(static_cast<std::int64_t>(rng() % 32)),
                            part_count ? static_cast<int>(rng() % part_count) : 0,
                            static_cast<DynamicMark>(1 + rng() % 8));
    return builder.finish("random://" + std::to_string(rng()), "test");
}

} // namespace testscores
