// Copyright 2026 The STS Authors
// License: Apache 2.0 (http://www.apache.org/licenses/LICENSE-2.0)

#pragma once

#include <cstddef>
#include <iosfwd>
#include <string>
#include <vector>

#include "sts/data/corpus.hpp"
#include "sts/prep/contour.hpp"
#include "sts/signal/stft.hpp"
#include "sts/signal/wav.hpp"

namespace sts {

// One paired training unit: a spoken word run, the sung rendition of the
// same words, the singing's melody contour and per-frame phone labels, plus
// both slices' phone annotations (times relative to each slice start).
struct TrainSample {
  Waveform speech;
  Waveform singing;
  MelodyContour contour;          // one value per singing frame
  std::vector<int> frame_phones;  // one label per singing frame
  PhoneAnnotation speech_phones;
  PhoneAnnotation singing_phones;
  std::string speaker_id;
  std::string song_id;
};

enum class Split { Train, Test };

struct SampleOptions {
  StftConfig stft{};              // frame grid for contours and labels
  double min_silence_sec = 0.1;   // SIL/INH at least this long splits segments
  int min_words = 3;              // shortest word run that becomes a sample
  std::string test_song;          // empty: lexicographically first song id
  std::ostream* log = nullptr;    // skipped-recording notes go here
};

// A word: a maximal run of consecutive non-silence phones. first_phone /
// last_phone index into the source annotation (inclusive).
struct WordSpan {
  double start_sec = 0.0;
  double end_sec = 0.0;
  std::size_t first_phone = 0;
  std::size_t last_phone = 0;
};

// Splits an annotation into segments and words: any SIL/INH interval lasting
// at least min_silence_sec ends the current segment, any shorter one ends
// only the current word. Returned as words grouped per segment; empty
// segments are dropped.
std::vector<std::vector<WordSpan>> segment_words(const PhoneAnnotation& ann,
                                                 double min_silence_sec);

// Number of samples a segment of `words` words yields: one per consecutive
// run of at least min_words words.
std::size_t sample_count_for_segment(std::size_t words, int min_words);

// Builds TrainSamples for one split. Every consecutive word run of at least
// min_words words inside a singing segment becomes a sample; the matching
// speech is cut from the read recording by word index. One song (test_song)
// is held out: Split::Test returns only its samples, Split::Train never
// includes it. Recordings whose read/sing word counts disagree are skipped
// with a note to opts.log. Waveforms are resampled to the 16 kHz pipeline
// rate before slicing.
std::vector<TrainSample> generate_samples(const Corpus& corpus, Split split,
                                          const SampleOptions& opts = {});

// Per-phone time alignment: stretches each speech phone (phase vocoder) so
// its duration matches the same phone in the singing annotation; speech-only
// silences collapse onto the singing gaps (usually near zero length). The
// two annotations must carry the same non-silence phone sequence or
// AlignError is raised. Output duration equals the singing annotation's
// span within a frame hop per boundary.
Waveform phsync_stretch(const Waveform& speech,
                        const PhoneAnnotation& speech_ann,
                        const PhoneAnnotation& sing_ann);

}  // namespace sts
