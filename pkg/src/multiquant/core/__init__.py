"""Core algorithms: data model, quantizer cost, Lloyd iteration and metrics."""
