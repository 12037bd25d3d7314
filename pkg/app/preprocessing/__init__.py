from app.preprocessing.caf import (
    AsymmetricArcSet,
    BadK,
    CafConfig,
    caf_filter,
    default_k,
    hamiltonicity_certificate,
)
