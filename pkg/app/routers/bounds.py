from fastapi import APIRouter, HTTPException, Path, Query, status
from typing import Optional
import logging

from app.models.bounds import BoundRequest
from app.services.bounds_service import bounds_service
from app.services.polynomial_service import polynomial_service
from app.utils.errors import SparseMahlerError
from app.utils.helpers import domain_http_error, with_schema
from app.utils.poly_parser import UNIVARIATE, format_poly, parse_poly

logger = logging.getLogger(__name__)

router = APIRouter()


@router.post("/verify")
def verify(request: BoundRequest):
    """Check h/2^(k-2) <= M(f) <= k h(f) and audit the derivative chain"""
    try:
        f = parse_poly(request.poly, UNIVARIATE)
        report = bounds_service.verify_theorem1(f, request.tol)
        return with_schema({"poly": format_poly(f), **report.model_dump(mode="json")})
    except HTTPException:
        raise
    except SparseMahlerError as e:
        raise domain_http_error(e)
    except Exception as e:
        logger.error(f"Error in verify: {str(e)}")
        raise HTTPException(
            status_code=status.HTTP_500_INTERNAL_SERVER_ERROR,
            detail="Error occurred while verifying the bound"
        )


@router.post("/proof-chain")
def proof_chain(request: BoundRequest):
    try:
        f = parse_poly(request.poly, UNIVARIATE)
        z_power, stripped = polynomial_service.strip_trivial(f)
        chain = bounds_service.proof_chain(stripped)
        return with_schema({
            "poly": format_poly(f),
            "z_power": z_power,
            "chain": [step.model_dump(mode="json") for step in chain],
        })
    except HTTPException:
        raise
    except SparseMahlerError as e:
        raise domain_http_error(e)
    except Exception as e:
        logger.error(f"Error in proof_chain: {str(e)}")
        raise HTTPException(
            status_code=status.HTTP_500_INTERNAL_SERVER_ERROR,
            detail="Error occurred while building the proof chain"
        )


@router.get("/formulas/{k}")
def formulas(
    k: int = Path(..., ge=2, le=64),
    b: Optional[float] = Query(None, ge=0.0, description="Measure bound B for the height cap")
):
    try:
        return with_schema(bounds_service.formula_sheet(k, b).model_dump(mode="json"))
    except HTTPException:
        raise
    except SparseMahlerError as e:
        raise domain_http_error(e)
    except Exception as e:
        logger.error(f"Error in formulas: {str(e)}")
        raise HTTPException(
            status_code=status.HTTP_500_INTERNAL_SERVER_ERROR,
            detail="Error occurred while evaluating the formulas"
        )
