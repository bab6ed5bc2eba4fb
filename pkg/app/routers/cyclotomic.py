from fastapi import APIRouter, HTTPException, Path, status
import logging

from app.models.cyclotomic import CycloRequest
from app.services.cyclotomic_service import cyclotomic_service
from app.utils.errors import SparseMahlerError
from app.utils.helpers import domain_http_error, with_schema
from app.utils.poly_parser import UNIVARIATE, format_poly, parse_poly

logger = logging.getLogger(__name__)

router = APIRouter()


@router.post("/cyclo")
def cyclo(request: CycloRequest):
    """Factor out every cyclotomic divisor; the input has M = 1 iff the remainder is 1"""
    try:
        f = parse_poly(request.poly, UNIVARIATE)
        factorization = cyclotomic_service.is_cyclotomic_product(f)
        return with_schema({
            "poly": format_poly(f),
            "is_cyclotomic_product": factorization.is_cyclotomic_product,
            "factorization": factorization.to_json(),
        })
    except HTTPException:
        raise
    except SparseMahlerError as e:
        raise domain_http_error(e)
    except Exception as e:
        logger.error(f"Error in cyclo: {str(e)}")
        raise HTTPException(
            status_code=status.HTTP_500_INTERNAL_SERVER_ERROR,
            detail="Error occurred during cyclotomic detection"
        )


@router.get("/cyclo/phi/{n}")
def phi(n: int = Path(..., ge=1, le=100000)):
    """Φ_n and, for n >= 2, its value at 1"""
    try:
        poly = cyclotomic_service.cyclotomic_poly(n)
        return with_schema({
            "n": n,
            "poly": format_poly(poly),
            "degree": poly.degree,
            "phi_at_one": cyclotomic_service.phi_at_one(n) if n > 1 else 0,
        })
    except HTTPException:
        raise
    except SparseMahlerError as e:
        raise domain_http_error(e)
    except Exception as e:
        logger.error(f"Error in phi: {str(e)}")
        raise HTTPException(
            status_code=status.HTTP_500_INTERNAL_SERVER_ERROR,
            detail="Error occurred while building the cyclotomic polynomial"
        )
