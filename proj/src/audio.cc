// Copyright 2026 The VOCA-cpp Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "voca/audio.h"

#include <algorithm>
#include <cmath>
#include <string>

#include "voca/binary_io.h"
#include "voca/error.h"

namespace voca {
namespace {

constexpr uint16_t kFormatPcm = 1;
constexpr uint16_t kFormatFloat = 3;
constexpr uint16_t kFormatExtensible = 0xFFFE;

}  // namespace

AudioClip ParseWav(const std::vector<char>& bytes) {
  ByteReader in(bytes, "wav");
  in.ExpectMagic("RIFF");
  in.U32();  // riff size, not trusted
  in.ExpectMagic("WAVE");

  uint16_t format = 0, channels = 0, bits = 0;
  uint32_t rate = 0;
  bool have_fmt = false;
  while (!in.AtEnd()) {
    char id[4];
    in.Bytes(id, 4);
    uint32_t size = in.U32();
    std::string chunk(id, 4);
    size_t start = in.position();
    if (chunk == "fmt ") {
      Require(size >= 16, ErrorCode::kFormat, "wav: short fmt chunk");
      uint16_t raw[2];
      in.Bytes(raw, 4);
      format = raw[0];
      channels = raw[1];
      rate = in.U32();
      in.U32();  // byte rate
      uint16_t tail[2];
      in.Bytes(tail, 4);
      bits = tail[1];
      if (format == kFormatExtensible) {
        Require(size >= 40, ErrorCode::kFormat, "wav: short extensible fmt");
        in.Seek(start + 24);
        uint16_t sub;
        in.Bytes(&sub, 2);
        format = sub;
      }
      have_fmt = true;
      in.Seek(std::min<size_t>(start + size, bytes.size()));
    } else if (chunk == "data") {
      Require(have_fmt, ErrorCode::kFormat, "wav: data before fmt");
      Require(channels == 1 || channels == 2, ErrorCode::kUnsupported,
              "wav: " + std::to_string(channels) + " channels");
      Require(rate > 0, ErrorCode::kFormat, "wav: zero sample rate");
      bool pcm16 = format == kFormatPcm && bits == 16;
      bool f32 = format == kFormatFloat && bits == 32;
      Require(pcm16 || f32, ErrorCode::kUnsupported,
              "wav: encoding format=" + std::to_string(format) +
                  " bits=" + std::to_string(bits));
      size_t frame_bytes = channels * (bits / 8);
      size = std::min<size_t>(size, in.remaining());
      size_t frames = size / frame_bytes;
      AudioClip clip;
      clip.sample_rate = static_cast<int>(rate);
      clip.samples.resize(frames);
      for (size_t i = 0; i < frames; ++i) {
        double acc = 0.0;
        for (int c = 0; c < channels; ++c) {
          if (pcm16) {
            int16_t v;
            in.Bytes(&v, 2);
            acc += v / 32768.0;
          } else {
            acc += in.F32();
          }
        }
        clip.samples[i] = acc / channels;
      }
      return clip;
    } else {
      in.Seek(std::min<size_t>(start + size, bytes.size()));
    }
    if (size % 2 == 1 && !in.AtEnd()) in.U8();
  }
  Fail(ErrorCode::kFormat, "wav: no data chunk");
}

AudioClip LoadWav(const std::filesystem::path& path) {
  return ParseWav(ReadFileBytes(path));
}

std::vector<char> EncodeWav(const AudioClip& clip, WavEncoding encoding,
                            int channels) {
  Require(clip.sample_rate > 0, ErrorCode::kParameter, "sample rate <= 0");
  Require(channels == 1 || channels == 2, ErrorCode::kParameter,
          "channels must be 1 or 2");
  uint16_t bits = encoding == WavEncoding::kPcm16 ? 16 : 32;
  uint16_t format = encoding == WavEncoding::kPcm16 ? kFormatPcm : kFormatFloat;
  uint32_t data_size =
      static_cast<uint32_t>(clip.samples.size() * channels * (bits / 8));
  ByteWriter out;
  out.Magic("RIFF");
  out.U32(36 + data_size);
  out.Magic("WAVE");
  out.Magic("fmt ");
  out.U32(16);
  uint16_t head[2] = {format, static_cast<uint16_t>(channels)};
  out.Bytes(head, 4);
  out.U32(static_cast<uint32_t>(clip.sample_rate));
  out.U32(static_cast<uint32_t>(clip.sample_rate * channels * (bits / 8)));
  uint16_t tail[2] = {static_cast<uint16_t>(channels * (bits / 8)), bits};
  out.Bytes(tail, 4);
  out.Magic("data");
  out.U32(data_size);
  for (double s : clip.samples) {
    for (int c = 0; c < channels; ++c) {
      if (encoding == WavEncoding::kPcm16) {
        double scaled = std::round(s * 32768.0);
        int16_t v = static_cast<int16_t>(std::clamp(scaled, -32768.0, 32767.0));
        out.Bytes(&v, 2);
      } else {
        out.F32(static_cast<float>(s));
      }
    }
  }
  return out.buffer();
}

void SaveWav(const AudioClip& clip, const std::filesystem::path& path,
             WavEncoding encoding) {
  WriteFileAtomic(path, EncodeWav(clip, encoding));
}

double Rms(const std::vector<double>& samples) {
  if (samples.empty()) return 0.0;
  double acc = 0.0;
  for (double s : samples) acc += s * s;
  return std::sqrt(acc / static_cast<double>(samples.size()));
}

AudioClip MixNoise(const AudioClip& signal, const AudioClip& noise,
                   double gain_db) {
  Require(signal.sample_rate == noise.sample_rate, ErrorCode::kParameter,
          "noise sample rate " + std::to_string(noise.sample_rate) +
              " != signal sample rate " + std::to_string(signal.sample_rate));
  Require(!signal.samples.empty(), ErrorCode::kEmptyInput, "empty signal");
  Require(!noise.samples.empty(), ErrorCode::kParameter, "empty noise");
  Require(gain_db <= 0.0, ErrorCode::kParameter, "noise gain must be <= 0 dB");

  const size_t n = signal.samples.size();
  std::vector<double> looped(n);
  for (size_t i = 0; i < n; ++i) {
    looped[i] = noise.samples[i % noise.samples.size()];
  }
  double noise_rms = Rms(looped);
  Require(noise_rms > 0.0, ErrorCode::kParameter, "noise has zero RMS");
  double scale = Rms(signal.samples) * std::pow(10.0, gain_db / 20.0) /
                 noise_rms;

  AudioClip out;
  out.sample_rate = signal.sample_rate;
  out.samples.resize(n);
  for (size_t i = 0; i < n; ++i) {
    out.samples[i] =
        std::clamp(signal.samples[i] + scale * looped[i], -1.0, 1.0);
  }
  return out;
}

}  // namespace voca
