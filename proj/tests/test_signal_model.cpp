#include <doctest.h>

#include "errp/signal_model.hpp"
#include "test_helpers.hpp"

using namespace errp;
using testing::error_of;

TEST_SUITE("signal_model") {

TEST_CASE("recording invariants") {
  CHECK(error_of([] { Recording(2000.0, {}, {}); }) == ErrorCode::InvalidArgument);
  CHECK(error_of([] { Recording(0.0, {"a"}, {1.0f}); }) == ErrorCode::InvalidArgument);
  CHECK(error_of([] { Recording(10.0, {"a", "b"}, {1.0f, 2.0f, 3.0f}); }) ==
        ErrorCode::InvalidArgument);
  CHECK(error_of([] { Recording(10.0, {"a"}, {std::nanf("")}); }) == ErrorCode::InvalidArgument);

  const Recording r(10.0, {"a", "b"}, {1, 2, 3, 4, 5, 6});
  CHECK(r.n_frames() == 3);
  CHECK(r.at(1, 1) == 4.0f);
  CHECK(r.duration_s() == doctest::Approx(0.3));
  CHECK(r.frames(1, 2)[0] == 3.0f);
  CHECK(error_of([&] { (void)r.frames(2, 2); }) == ErrorCode::OutOfBounds);
}

TEST_CASE("frame index absorbs decimal round-off") {
  CHECK(frame_index(7.1, 2000.0) == 14200);
  CHECK(frame_index(0.0, 2000.0) == 0);
  CHECK(frame_index(0.00049, 2000.0) == 0);
  CHECK(frame_count(0.9, 2000.0) == 1800);
  CHECK(frame_count(0.9, 50.0) == 45);
}

TEST_CASE("episode timelines group markers") {
  const std::vector<MarkerEvent> m{{0, MarkerKind::EpisodeStart, 0, Label::Error},
                                   {3, MarkerKind::MovementOnset, 0, Label::Error},
                                   {8, MarkerKind::GestureOnset, 0, Label::Error},
                                   {10, MarkerKind::EpisodeEnd, 0, Label::Error}};
  const auto tl = episode_timelines(m);
  REQUIRE(tl.size() == 1);
  CHECK(tl[0] == EpisodeTimeline{0, Label::Error, 0, 3, 8, 10});
  CHECK(episode_timelines({}).empty());

  auto missing = m;
  missing.erase(missing.begin() + 2);
  CHECK(error_of([&] { episode_timelines(missing); }) == ErrorCode::MissingMarker);

  auto disordered = m;
  disordered[1].time_s = 9.0;
  CHECK(error_of([&] { episode_timelines(disordered); }) == ErrorCode::OrderViolation);

  auto relabeled = m;
  relabeled[3].label = Label::Correct;
  CHECK(error_of([&] { episode_timelines(relabeled); }) == ErrorCode::InvalidArgument);
}

TEST_CASE("timelines sorted by start and flatten back to markers") {
  std::vector<EpisodeTimeline> tls{testing::timeline(5, Label::Correct, 12.0),
                                   testing::timeline(2, Label::Error, 0.0)};
  const auto markers = timeline_markers(tls);
  CHECK(markers.size() == 8);
  const auto back = episode_timelines(markers);
  REQUIRE(back.size() == 2);
  CHECK(back[0] == tls[1]);
  CHECK(back[1] == tls[0]);
  CHECK(timeline_markers(back) == timeline_markers(tls) );
}

TEST_CASE("resolve_window semantics") {
  const auto tl = testing::timeline(0, Label::Error, 0.0);
  auto iv = resolve_window({Anchor::GestureOnset, Alignment::EndsAt, 0.0, 0.9}, tl);
  CHECK(iv.start_s == doctest::Approx(7.1));
  CHECK(iv.end_s == doctest::Approx(8.0));
  iv = resolve_window({Anchor::MovementOnset, Alignment::StartsAt, 2.0, 0.9}, tl);
  CHECK(iv.start_s == doctest::Approx(5.0));
  CHECK(iv.end_s == doctest::Approx(5.9));
  iv = resolve_window({Anchor::GestureOnset, Alignment::EndsAt, -0.15, 0.9}, tl);
  CHECK(iv.start_s == doctest::Approx(6.95));
  CHECK(iv.end_s == doctest::Approx(7.85));

  CHECK(error_of([&] {
          resolve_window({Anchor::MovementOnset, Alignment::EndsAt, -2.5, 0.9}, tl, 10.0);
        }) == ErrorCode::OutOfBounds);
  CHECK(error_of([&] {
          resolve_window({Anchor::GestureOnset, Alignment::StartsAt, 1.5, 0.9}, tl, 10.0);
        }) == ErrorCode::OutOfBounds);
}

TEST_CASE("resolve_window is translation-equivariant") {
  const WindowSpec specs[] = {{Anchor::GestureOnset, Alignment::EndsAt, -0.1, 0.9},
                              {Anchor::MovementOnset, Alignment::StartsAt, 2.5, 0.9}};
  for (double shift : {0.25, 12.0, 647.5}) {
    const auto a = testing::timeline(0, Label::Error, 0.0);
    const auto b = testing::timeline(0, Label::Error, shift);
    for (const auto& s : specs) {
      CHECK(resolve_window(s, b).start_s - resolve_window(s, a).start_s ==
            doctest::Approx(shift).epsilon(1e-12));
    }
  }
}

TEST_CASE("enum text forms roundtrip") {
  for (auto k : {MarkerKind::EpisodeStart, MarkerKind::MovementOnset, MarkerKind::GestureOnset,
                 MarkerKind::EpisodeEnd}) {
    CHECK(parse_marker_kind(to_string(k)) == k);
  }
  CHECK(parse_label("error") == Label::Error);
  CHECK_FALSE(parse_label("unknown").has_value());
  CHECK(parse_anchor(to_string(Anchor::MovementOnset)) == Anchor::MovementOnset);
  CHECK(parse_alignment(to_string(Alignment::StartsAt)) == Alignment::StartsAt);
  CHECK(label_sign(Label::Error) == 1);
  CHECK(label_sign(Label::Correct) == -1);
}

}
