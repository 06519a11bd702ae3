import logging
from typing import Optional, Union

import uvicorn
from fastapi import FastAPI
from fastapi.middleware.cors import CORSMiddleware
from fastapi.responses import JSONResponse
from pydantic import BaseModel

from netspace.config import resolve_config
from netspace.corpus import net_corpus
from netspace.dirichlet import characterization_constant
from netspace.errors import ConsistencyError, NetSpaceError
from netspace.harness import build_family, build_lattice, run_campaign
from netspace.lattice import check_density_condition, weyl_count_check
from netspace.netnorm import NormParams, net_from_json, net_norm
from netspace.reports import json_safe

logger = logging.getLogger(__name__)

app = FastAPI(title="netspace")

app.add_middleware(
    CORSMiddleware,
    allow_origins=["*"],
    allow_credentials=True,
    allow_methods=["*"],
    allow_headers=["*"],
)

Exponent = Union[float, str]


class LatticeSpec(BaseModel):
    lattice_kind: str = "su2"
    lattice_file: Optional[str] = None
    l_max: float = 5.0
    dim: int = 1
    radius: int = 8
    lambda_rule: str = "rank"


class FamilySpec(LatticeSpec):
    family: str = "segments"
    family_file: Optional[str] = None
    max_cardinality: Optional[int] = None
    max_count: Optional[int] = None
    segment_measure: str = "lattice"


class NetNormRequest(FamilySpec):
    p: Exponent = 2.0
    q: Exponent = "inf"
    engine: str = "exact"
    net: Optional[dict] = None
    corpus: str = "mixed:20:seed=0"


class CharacterizeRequest(FamilySpec):
    p: Exponent = 2.0
    grid_size: Optional[int] = None
    quad: Optional[int] = None
    threads: Optional[int] = None


class VerifyRequest(FamilySpec):
    inequality: str
    corpus: str = "mixed:20:seed=0"
    p: Exponent = 2.0
    q: Exponent = "inf"
    engine: str = "exact"
    options: dict = {}


def _error_response(e: NetSpaceError) -> JSONResponse:
    status_code = 500 if isinstance(e, ConsistencyError) else 400
    return JSONResponse(content={"error": type(e).__name__, "message": str(e)}, status_code=status_code)


def _config(command: str, request: BaseModel, **extra):
    values = request.model_dump(exclude={"net", "options"})
    values.update(extra)
    return resolve_config({"command": command, **values})


@app.post("/netnorm/")
def netnorm(request: NetNormRequest):
    """
    Net norm of the posted net, or of every net in the corpus when no net is posted.
    """
    try:
        config = _config("netnorm", request)
        lattice = build_lattice(config)
        params = NormParams(p=config.p, q=config.q, family=build_family(config, lattice))
        if request.net is not None:
            result = net_norm(net_from_json(request.net, lattice), params, config.engine)
            return json_safe(result.to_dict(lattice))
        results = []
        for name, F in net_corpus(config.corpus, lattice):
            results.append({"name": name, **net_norm(F, params, config.engine).to_dict(lattice)})
        return json_safe({"results": results})
    except NetSpaceError as e:
        logger.error(f"Error computing net norm: {e}")
        return _error_response(e)


@app.post("/characterize/")
def characterize(request: CharacterizeRequest):
    """
    Characterization constant C_pM, its witness and the per-element table.
    """
    try:
        config = _config("characterize", request)
        lattice = build_lattice(config)
        result = characterization_constant(lattice, build_family(config, lattice), config.p, None, config.grid_size, config.quad, config.threads)
        return json_safe(result.to_dict())
    except NetSpaceError as e:
        logger.error(f"Error computing the characterization constant: {e}")
        return _error_response(e)


@app.post("/verify/")
def verify(request: VerifyRequest):
    """
    Runs a verification campaign and returns the full report.
    """
    try:
        config = _config("verify", request, **request.options)
        return run_campaign(config).to_dict()
    except NetSpaceError as e:
        logger.error(f"Error running campaign {request.inequality}: {e}")
        return _error_response(e)


@app.get("/validate_lattice/")
def validate_lattice(
    lattice_kind: str = "su2", l_max: float = 5.0, dim: int = 1, radius: int = 8, lambda_rule: str = "rank", beta: float = 0.0, side: str = "below"
):
    """
    Density condition band of a built-in lattice, plus the Weyl counting band on SU(2).
    """
    try:
        config = resolve_config(
            {
                "command": "validate-lattice",
                "lattice_kind": lattice_kind,
                "l_max": l_max,
                "dim": dim,
                "radius": radius,
                "lambda_rule": lambda_rule,
                "beta": beta,
                "side": side,
            }
        )
        lattice = build_lattice(config)
        response = {"density": check_density_condition(lattice, config.beta, config.side), "elements": len(lattice), "kind": lattice.kind}
        if lattice.kind == "su2-dual":
            response["weyl"] = weyl_count_check(lattice)
        return json_safe(response)
    except NetSpaceError as e:
        logger.error(f"Error validating lattice: {e}")
        return _error_response(e)


if __name__ == "__main__":
    uvicorn.run(app, host="0.0.0.0", port=8000)
