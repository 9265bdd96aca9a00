"""HTTP front end for the preference study.

Raters only ever see presentation tokens and opaque video ids; the mapping
back to model names lives server-side. Submissions funnel through a single
lock so log appends stay serialized.
"""

from __future__ import annotations

import hashlib
import threading
from pathlib import Path

from fastapi import FastAPI, HTTPException, Query
from fastapi.responses import FileResponse, JSONResponse, RedirectResponse
from fastapi.staticfiles import StaticFiles
from pydantic import BaseModel

from .core import (
    CRITERION_PROMPTS,
    CRITERION_TITLES,
    Criterion,
    DuplicateSubmissionError,
    MissingCriterionError,
    StudyState,
    UnknownTokenError,
)
from .ratings import fit_ratings, win_rates


class RatingsIn(BaseModel):
    token: str
    # left/right relative: negative prefers the left video
    ratings: dict[str, int]


def _opaque_ids(state: StudyState, salt: bytes) -> dict[str, tuple[str, str]]:
    table = {}
    for model in state.config.models:
        for scene in state.config.scenes:
            oid = hashlib.blake2b(f"{model}|{scene}".encode(), key=salt,
                                  digest_size=12).hexdigest()
            table[oid] = (model, scene)
    return table


def create_app(state: StudyState, media_dir: str | Path | None = None,
               ui_dir: str | Path | None = None, salt: bytes | None = None) -> FastAPI:
    app = FastAPI(title="pairwise preference study")
    if salt is None:
        salt = hashlib.blake2b(f"video-salt|{state.config.seed}".encode(),
                               digest_size=16).digest()
    lookup = _opaque_ids(state, salt)
    by_pair = {pair_scene: oid for oid, pair_scene in lookup.items()}
    lock = threading.Lock()
    media = Path(media_dir) if media_dir is not None else None

    criteria_payload = [
        {"id": c.value, "title": CRITERION_TITLES[c], "prompt": CRITERION_PROMPTS[c]}
        for c in state.config.criteria
    ]

    @app.get("/api/next-pair")
    def next_pair(rater: str = Query(min_length=1)):
        with lock:
            pres = state.next_pair(rater)
            done = len(state.rated.get(rater, set()))
        if pres is None:
            return {"complete": True, "progress": {"done": done, "total": len(state.cells)}}
        return {
            "complete": False,
            "token": pres.token,
            "left_video": f"/videos/{by_pair[(pres.left, pres.scene_id)]}",
            "right_video": f"/videos/{by_pair[(pres.right, pres.scene_id)]}",
            "criteria": criteria_payload,
            "progress": {"done": done, "total": len(state.cells)},
        }

    @app.post("/api/ratings")
    def submit(body: RatingsIn):
        try:
            ratings = {Criterion(k): v for k, v in body.ratings.items()}
        except ValueError:
            raise HTTPException(400, detail="unknown criterion id")
        try:
            with lock:
                records = state.submit(body.token, ratings)
        except DuplicateSubmissionError:
            raise HTTPException(409, detail="token already submitted")
        except UnknownTokenError:
            raise HTTPException(404, detail="unknown presentation token")
        except (MissingCriterionError, ValueError) as exc:
            raise HTTPException(400, detail=str(exc))
        return {"ok": True, "records": len(records)}

    @app.get("/api/results")
    def results(criterion: str = "general"):
        try:
            crit = Criterion(criterion)
        except ValueError:
            raise HTTPException(400, detail="unknown criterion id")
        with lock:
            records = list(state.records)
        table = fit_ratings(records, crit, models=state.config.models)
        rates = win_rates(records, crit, models=state.config.models)
        payload = {
            "criterion": crit.value,
            "n_records": sum(1 for r in records if r.criterion is crit),
            "win_rates": [
                {"model_a": p.model_a, "model_b": p.model_b, "n": p.n,
                 "a_pref": p.a_pref, "b_pref": p.b_pref, "no_pref": p.no_pref}
                for p in rates
            ],
            "elo": [
                {"model": m.model, "elo": m.elo, "wins": m.wins,
                 "ties": m.ties, "losses": m.losses}
                for m in table.models
            ],
        }
        return JSONResponse(content=payload)

    @app.get("/videos/{opaque_id}")
    def video(opaque_id: str):
        entry = lookup.get(opaque_id)
        if entry is None or media is None:
            raise HTTPException(404, detail="unknown video")
        model, scene = entry
        path = media / model / f"{scene}.mp4"
        if not path.exists():
            raise HTTPException(404, detail="video file missing")
        return FileResponse(path, media_type="video/mp4")

    if ui_dir is not None and Path(ui_dir).is_dir():
        app.mount("/ui", StaticFiles(directory=str(ui_dir), html=True), name="ui")

        @app.get("/")
        def index():
            return RedirectResponse(url="/ui/")

    return app
