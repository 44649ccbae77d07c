"""Strong separability workbench: trace forms, separability idempotents, Frobenius structures and diagram checks."""
