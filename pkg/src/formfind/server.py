"""HTTP prediction service for the design explorer.

Stateless JSON endpoints over trained models: the models are loaded once and
shared read-only across requests; each request runs its own encode+solve.
Schema violations return 400, out-of-range parameters 422, and solver faults
500 with diagnostics.
"""
from __future__ import annotations

import time

import numpy as np
from fastapi import FastAPI, HTTPException, Request
from fastapi.exceptions import RequestValidationError
from fastapi.responses import JSONResponse
from pydantic import BaseModel, Field

from . import amortizer, datagen, fdm
from .losses import physics_loss, shape_loss
from .structures import InvalidArgumentError
from .tasks import ShellTask, Task, TowerTask


class ShellRequest(BaseModel):
    control_points: list[list[float]] = Field(..., description="16 control points, [x,y,z] each")
    grid: int = Field(..., description="grid side G of the trained shell model")


class RingRequest(BaseModel):
    alpha1: float
    alpha2: float
    beta: float


class TowerRings(BaseModel):
    bottom: RingRequest
    middle: RingRequest
    top: RingRequest


class TowerRequest(BaseModel):
    rings: TowerRings


def _prediction_payload(model, task: Task, case) -> dict:
    start = time.perf_counter()
    q, state = amortizer.predict(model, task, case)
    elapsed_ms = (time.perf_counter() - start) * 1e3
    return {
        "target": case.target.positions.tolist(),
        "positions": state.positions.tolist(),
        "q": q.values.tolist(),
        "forces": state.forces.tolist(),
        "lengths": state.lengths.tolist(),
        "residual_fro": physics_loss(state.residuals),
        "shape_loss": shape_loss(state.positions, case.target, task.p),
        "elapsed_ms": elapsed_ms,
    }


def create_app(models: dict) -> FastAPI:
    """Build the service over {"shells": (model, task), "towers": (model, task)}."""
    app = FastAPI(title="formfind prediction service")

    @app.exception_handler(RequestValidationError)
    async def schema_error(request: Request, exc: RequestValidationError):
        return JSONResponse(status_code=400, content={"detail": exc.errors()})

    @app.get("/tasks")
    def tasks():
        out = {}
        for name, (model, task) in models.items():
            out[name] = {
                "nodes": task.topology.num_nodes,
                "bars": task.topology.num_bars,
                "fixed": task.topology.num_fixed,
                "kind": model.kind,
            }
        return out

    @app.get("/model-info")
    def model_info():
        out = {}
        for name, (model, task) in models.items():
            out[name] = {
                "kind": model.kind,
                "task": model.task_name,
                "layer_sizes": list(model.encoder_spec.layer_sizes),
                "shift": model.head.shift,
                "meta": {
                    k: v for k, v in model.meta.items() if isinstance(v, (int, float, str))
                },
            }
        return out

    @app.post("/predict/shell")
    def predict_shell(body: ShellRequest):
        if "shells" not in models:
            raise HTTPException(status_code=404, detail="no shell model loaded")
        model, task = models["shells"]
        pts = np.asarray(body.control_points, dtype=float)
        if pts.shape != (16, 3):
            raise HTTPException(status_code=400, detail="control_points must be 16 [x,y,z] rows")
        if body.grid != task.grid_side:
            raise HTTPException(
                status_code=422,
                detail=f"model was trained at grid={task.grid_side}, got {body.grid}",
            )
        grid = datagen.BezierControlGrid(points=pts.reshape(4, 4, 3), plan_width=task.plan_width)
        case = task.case_from_controls(grid, {"source": "http"})
        try:
            return _prediction_payload(model, task, case)
        except (fdm.SingularSystemError, fdm.DegenerateGeometryError) as exc:
            raise HTTPException(status_code=500, detail=str(exc))

    @app.post("/predict/tower")
    def predict_tower(body: TowerRequest):
        if "towers" not in models:
            raise HTTPException(status_code=404, detail="no tower model loaded")
        model, task = models["towers"]
        try:
            params = datagen.TowerParams(
                bottom=datagen.RingSpec(**body.rings.bottom.model_dump()),
                middle=datagen.RingSpec(**body.rings.middle.model_dump()),
                top=datagen.RingSpec(**body.rings.top.model_dump()),
                height=task.height,
                num_rings=task.num_rings,
                points_per_ring=task.points_per_ring,
            )
        except InvalidArgumentError as exc:
            raise HTTPException(status_code=422, detail=str(exc))
        case = task.case_from_params(params)
        try:
            return _prediction_payload(model, task, case)
        except (fdm.SingularSystemError, fdm.DegenerateGeometryError) as exc:
            raise HTTPException(status_code=500, detail=str(exc))

    return app
