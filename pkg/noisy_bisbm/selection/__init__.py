from .icl import (
    SelectionRecord, SelectionGrid, icl_penalty, icl_score, select_model, records_to_frame,
)
