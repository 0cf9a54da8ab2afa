from __future__ import annotations

import pytest
from fastapi.testclient import TestClient

from studyloop.api import create_app
from studyloop.course import convert_course
from studyloop.service import StudyService

from conftest import build_invideo_course
from test_service import CORRECT, RATE_TOP, WRONG, FakeClock, study_course


@pytest.fixture
def client():
    service = StudyService([study_course()], clock=FakeClock())
    with TestClient(create_app(service)) as test_client:
        yield test_client
    service.close()


def start_session(client, user="learner-1"):
    resp = client.post("/sessions", json={"user_id": user, "course_id": "study-1"})
    assert resp.status_code == 201
    return resp.json()


class TestCourseEndpoint:
    def test_manifest_served(self, client):
        resp = client.get("/courses/study-1")
        assert resp.status_code == 200
        doc = resp.json()
        assert doc["course_id"] == "study-1"
        assert {v["video_id"] for v in doc["videos"]} == {"v1", "v2"}

    def test_unknown_course_404(self, client):
        assert client.get("/courses/ghost").status_code == 404


class TestSessionFlow:
    def test_start_session_returns_view(self, client):
        view = start_session(client)
        assert view["mode"] == "initial_pass"
        assert view["question"]["question_id"] == "v1-quiz-150"
        assert view["question"]["options"] == [f"choice {i}" for i in (1, 2, 3, 4)]
        # the answer key must never be exposed
        assert "correct" not in str(view["question"]).lower()

    def test_current_question_endpoint(self, client):
        view = start_session(client)
        resp = client.get(f"/sessions/{view['session_id']}/question")
        assert resp.status_code == 200
        assert resp.json()["question_id"] == "v1-quiz-150"

    def test_submit_correct_answer(self, client):
        view = start_session(client)
        resp = client.post(
            f"/sessions/{view['session_id']}/answers",
            json={"question_id": "v1-quiz-150", "selected": CORRECT},
        )
        assert resp.status_code == 200
        body = resp.json()
        assert body["correct"] is True
        assert body["session"]["question"]["question_id"] == "v1-quiz-300"

    def test_stale_answer_conflict_carries_current(self, client):
        view = start_session(client)
        sid = view["session_id"]
        client.post(f"/sessions/{sid}/answers", json={"question_id": "v1-quiz-150", "selected": CORRECT})
        resp = client.post(
            f"/sessions/{sid}/answers",
            json={"question_id": "v1-quiz-150", "selected": CORRECT},
        )
        assert resp.status_code == 409
        assert resp.json()["current_question_id"] == "v1-quiz-300"

    def test_unknown_session_404(self, client):
        resp = client.post(
            "/sessions/ghost/answers", json={"question_id": "q", "selected": [True]}
        )
        assert resp.status_code == 404


class TestWatchEndpoints:
    def test_watch_report_returns_regions(self, client):
        view = start_session(client)
        sid = view["session_id"]
        client.post(
            f"/sessions/{sid}/watch",
            json={"video_id": "v1", "from_s": 0, "to_s": 0, "action": "play"},
        )
        resp = client.post(
            f"/sessions/{sid}/watch",
            json={"video_id": "v1", "from_s": 0, "to_s": 30, "action": "pause"},
        )
        assert resp.status_code == 200
        regions = resp.json()["regions"]
        assert regions[0] == {"start_s": 0, "end_s": 30, "tag": "seen_current_part"}
        assert regions[-1] == {"start_s": 0, "end_s": 150, "tag": "relevant"}

    def test_oversized_heartbeat_422(self, client):
        view = start_session(client)
        sid = view["session_id"]
        client.post(
            f"/sessions/{sid}/watch",
            json={"video_id": "v1", "from_s": 0, "to_s": 0, "action": "play"},
        )
        resp = client.post(
            f"/sessions/{sid}/watch",
            json={"video_id": "v1", "from_s": 0, "to_s": 7, "action": "heartbeat"},
        )
        assert resp.status_code == 422

    def test_get_regions_without_reporting(self, client):
        view = start_session(client)
        resp = client.get(f"/sessions/{view['session_id']}/watch/v1")
        assert resp.status_code == 200
        assert resp.json()["regions"][0]["tag"] == "unseen"


class TestTimelineAndReview:
    def _complete_pass(self, client, sid):
        client.post(f"/sessions/{sid}/answers", json={"question_id": "v1-quiz-150", "selected": CORRECT})
        client.post(f"/sessions/{sid}/answers", json={"question_id": "v1-quiz-300", "selected": WRONG})
        client.post(f"/sessions/{sid}/answers", json={"question_id": "v1-quiz-300", "selected": CORRECT})
        generic = client.get(f"/sessions/{sid}/question").json()["question_id"]
        client.post(f"/sessions/{sid}/answers", json={"question_id": generic, "selected": RATE_TOP})

    def test_timeline_newest_first(self, client):
        view = start_session(client)
        sid = view["session_id"]
        client.post(f"/sessions/{sid}/answers", json={"question_id": "v1-quiz-150", "selected": CORRECT})
        client.post(f"/sessions/{sid}/answers", json={"question_id": "v1-quiz-300", "selected": CORRECT})
        entries = client.get(f"/sessions/{sid}/timeline").json()["entries"]
        assert [e["question_id"] for e in entries] == ["v1-quiz-300", "v1-quiz-150"]

    def test_review_409_before_pass(self, client):
        view = start_session(client)
        assert client.get(f"/sessions/{view['session_id']}/review").status_code == 409

    def test_review_entries_include_components(self, client):
        view = start_session(client)
        sid = view["session_id"]
        self._complete_pass(client, sid)
        resp = client.get(f"/sessions/{sid}/review")
        assert resp.status_code == 200
        entries = resp.json()["entries"]
        assert len(entries) == 3
        for e in entries:
            assert {"performance", "watched", "recency", "combined"} <= set(e["mastery"])

    def test_timeline_expansion_logged(self, client):
        view = start_session(client)
        sid = view["session_id"]
        client.post(f"/sessions/{sid}/answers", json={"question_id": "v1-quiz-150", "selected": CORRECT})
        resp = client.post(
            f"/sessions/{sid}/timeline-expansions", json={"question_id": "v1-quiz-150"}
        )
        assert resp.status_code == 204


class TestSkipEndpoints:
    def test_skip_target(self, client):
        view = start_session(client)
        sid = view["session_id"]
        client.post(
            f"/sessions/{sid}/watch",
            json={"video_id": "v1", "from_s": 0, "to_s": 0, "action": "play"},
        )
        client.post(
            f"/sessions/{sid}/watch",
            json={"video_id": "v1", "from_s": 0, "to_s": 60, "action": "pause"},
        )
        resp = client.get(
            f"/sessions/{sid}/skip-target",
            params={"video_id": "v1", "position_s": 15},
        )
        assert resp.status_code == 200
        assert resp.json()["target_s"] == 60

    def test_skip_target_null_when_fully_watched(self, client):
        view = start_session(client)
        sid = view["session_id"]
        client.post(
            f"/sessions/{sid}/watch",
            json={"video_id": "v1", "from_s": 0, "to_s": 0, "action": "play"},
        )
        client.post(
            f"/sessions/{sid}/watch",
            json={"video_id": "v1", "from_s": 0, "to_s": 300, "action": "pause"},
        )
        resp = client.get(
            f"/sessions/{sid}/skip-target", params={"video_id": "v1", "position_s": 0}
        )
        assert resp.json()["target_s"] is None

    def test_skip_click_accepted(self, client):
        view = start_session(client)
        sid = view["session_id"]
        resp = client.post(
            f"/sessions/{sid}/skip-clicks",
            json={"video_id": "v1", "from_s": 10, "to_s": 60},
        )
        assert resp.status_code == 204
