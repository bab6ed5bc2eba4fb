from fastapi import APIRouter, HTTPException, status
import logging

from app.models.census import CensusKind, ConstructRequest, SearchConfig, SearchScRequest
from app.services.census_service import census_service
from app.utils.errors import SparseMahlerError
from app.utils.helpers import domain_http_error, with_schema
from app.utils.poly_parser import format_poly

logger = logging.getLogger(__name__)

router = APIRouter()


@router.post("/construct")
def construct(request: ConstructRequest):
    """Composite-k member g(z^m) h(z^l)"""
    try:
        record = census_service.composite_construction(request.s, request.t, request.m, request.l)
        return with_schema({"poly": format_poly(record.polynomial()), **record.model_dump(mode="json")})
    except HTTPException:
        raise
    except SparseMahlerError as e:
        raise domain_http_error(e)
    except Exception as e:
        logger.error(f"Error in construct: {str(e)}")
        raise HTTPException(
            status_code=status.HTTP_500_INTERNAL_SERVER_ERROR,
            detail="Error occurred during the construction"
        )


@router.post("/search-sc")
def search_sc(request: SearchScRequest):
    """Bounded in-memory S_c search; large searches belong to the CLI"""
    try:
        config = SearchConfig(k=request.k, max_degree=request.max_degree)
        records = list(census_service.search_Sc(config))
        return with_schema({
            "config_hash": config.config_hash(),
            "count": len(records),
            "members": [r.model_dump(mode="json") for r in records if r.kind == CensusKind.SC_MEMBER],
        })
    except HTTPException:
        raise
    except SparseMahlerError as e:
        raise domain_http_error(e)
    except ValueError as e:
        raise HTTPException(status_code=status.HTTP_422_UNPROCESSABLE_ENTITY, detail=str(e))
    except Exception as e:
        logger.error(f"Error in search_sc: {str(e)}")
        raise HTTPException(
            status_code=status.HTTP_500_INTERNAL_SERVER_ERROR,
            detail="Error occurred during the search"
        )
