from pydantic_settings import BaseSettings
from typing import List

class Settings(BaseSettings):
    # API
    API_V1_STR: str = "/api/v1"
    PROJECT_NAME: str = "Sparse Mahler API"
    SCHEMA_VERSION: str = "sparse-mahler/1"
    LOG_LEVEL: str = "INFO"

    # Polynomials
    EXPONENT_CAP: int = 2 ** 62

    # Root finding
    ROOT_TOL: float = 1e-12
    ROOT_MAX_ITER: int = 500
    MAX_ROOT_DEGREE: int = 10_000  # above this only quadrature is used
    ROOT_BLOCK_SIZE: int = 512  # rows of the pairwise Aberth sum held in memory
    ROOT_SQF_TRIGGER: float = 1e-10  # unresolved roots trigger an exact squarefree split
    ROOT_FALLBACK_MAX_DEGREE: int = 2000  # companion-matrix roots when Aberth fails

    # Unit-circle quadrature
    QUAD_POINTS: int = 2 ** 16
    QUAD_MAX_POINTS: int = 2 ** 24
    QUAD_CHUNK: int = 2 ** 14
    ZERO_SKIP_LIMIT: float = 0.01  # fraction of skipped grid zeros tolerated
    CIRCLE_ZERO_TOL: float = 1e-13

    # Torus QMC
    QMC_BUDGET: int = 2 ** 20
    QMC_REPLICAS: int = 16
    QMC_SEED: int = 0

    # Cyclotomic detection
    CYCLO_PREFILTER_M: float = 1.2
    CYCLO_MAX_DEGREE: int = 5000
    SUBSET_SCAN_MAX_TERMS: int = 20

    # Bounds
    BOUND_TOL: float = 1e-9
    GAP_CONSTANT: float = 0.785

    # Boyd-Lawton restrictions
    BOYD_LAWTON_MAX_DEGREE: int = 10 ** 6

    # Worker parallelism
    THREADS: int = 1

    # CORS for the HTTP surface
    BACKEND_CORS_ORIGINS: List[str] = [
        "http://localhost:3000",
        "http://127.0.0.1:3000",
    ]

    class Config:
        env_file = ".env"

settings = Settings()
