from fastapi import FastAPI
from fastapi.middleware.cors import CORSMiddleware

from app.config import settings
from app.routers import bounds, census, cyclotomic, measure

app = FastAPI(
    title=settings.PROJECT_NAME,
    version="1.0.0",
    description="Mahler measures, cyclotomic detection and bounded searches for sparse integer polynomials"
)

# CORS middleware (must be first)
app.add_middleware(
    CORSMiddleware,
    allow_origins=settings.BACKEND_CORS_ORIGINS,
    allow_credentials=True,
    allow_methods=["*"],
    allow_headers=["*"],
)

# Include routers
app.include_router(measure.router, prefix=settings.API_V1_STR, tags=["measure"])
app.include_router(cyclotomic.router, prefix=settings.API_V1_STR, tags=["cyclotomic"])
app.include_router(bounds.router, prefix=f"{settings.API_V1_STR}/bounds", tags=["bounds"])
app.include_router(census.router, prefix=f"{settings.API_V1_STR}/census", tags=["census"])

@app.get("/")
async def root():
    return {"message": settings.PROJECT_NAME, "version": "1.0.0", "schema": settings.SCHEMA_VERSION}

@app.get("/health")
async def health_check():
    return {"status": "healthy"}
