from fastapi import APIRouter, HTTPException, status
import logging

from app.models.measure import BoydLawtonRequest, MeasureRequest, MultiMeasureRequest
from app.services.multivar_measure_service import multivar_measure_service
from app.services.roots_measure_service import roots_measure_service
from app.utils.errors import SparseMahlerError
from app.utils.helpers import domain_http_error, with_schema
from app.utils.poly_parser import MULTIVARIATE, UNIVARIATE, format_poly, parse_poly

logger = logging.getLogger(__name__)

router = APIRouter()


def _estimate_payload(estimate) -> dict:
    return {**estimate.model_dump(mode="json"), "m": estimate.log_value, "M": estimate.mahler}


@router.post("/measure")
def measure(request: MeasureRequest):
    """
    Mahler measure of a univariate integer polynomial.
    `auto` uses root products up to the root-finding degree limit and quadrature beyond it.
    """
    try:
        f = parse_poly(request.poly, UNIVARIATE)
        estimate = roots_measure_service.mahler_measure(f, method=request.method, num_points=request.points)
        return with_schema({"poly": format_poly(f), **_estimate_payload(estimate)})
    except HTTPException:
        raise
    except SparseMahlerError as e:
        raise domain_http_error(e)
    except Exception as e:
        logger.error(f"Error in measure: {str(e)}")
        raise HTTPException(
            status_code=status.HTTP_500_INTERNAL_SERVER_ERROR,
            detail="Error occurred while computing the measure"
        )


@router.post("/measure-multi")
def measure_multi(request: MultiMeasureRequest):
    """Torus QMC estimate of the measure of a Laurent polynomial in x1..xN"""
    try:
        F = parse_poly(request.poly, MULTIVARIATE)
        estimate = multivar_measure_service.mahler_qmc(F, budget=request.budget, seed=request.seed)
        return with_schema({"poly": format_poly(F), **_estimate_payload(estimate)})
    except HTTPException:
        raise
    except SparseMahlerError as e:
        raise domain_http_error(e)
    except Exception as e:
        logger.error(f"Error in measure_multi: {str(e)}")
        raise HTTPException(
            status_code=status.HTTP_500_INTERNAL_SERVER_ERROR,
            detail="Error occurred while computing the torus measure"
        )


@router.post("/boyd-lawton")
def boyd_lawton(request: BoydLawtonRequest):
    """Measures of the restrictions F(z, z^n, ..., z^{n^(l-1)})"""
    try:
        F = parse_poly(request.poly, MULTIVARIATE)
        safe = multivar_measure_service.safe_substitution_index(F)
        table = multivar_measure_service.boyd_lawton_sequence(F, request.ns)
        return with_schema({
            "poly": format_poly(F),
            "safe_index": safe.model_dump(mode="json"),
            "rows": [
                {
                    "n": row.n,
                    "degree": row.degree,
                    "height_preserved": row.height_preserved,
                    **_estimate_payload(row.estimate),
                }
                for row in table.rows
            ],
        })
    except HTTPException:
        raise
    except SparseMahlerError as e:
        raise domain_http_error(e)
    except Exception as e:
        logger.error(f"Error in boyd_lawton: {str(e)}")
        raise HTTPException(
            status_code=status.HTTP_500_INTERNAL_SERVER_ERROR,
            detail="Error occurred while computing the restriction sequence"
        )
