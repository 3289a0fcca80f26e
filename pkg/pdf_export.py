"""
PDF export of a distance matrix using ReportLab.
Provides export_matrix_pdf(filename, labels, rows, meta) used by ReportService.export_to_pdf.
"""
from reportlab.lib.pagesizes import A4, landscape
from reportlab.lib import colors
from reportlab.platypus import SimpleDocTemplate, Table, TableStyle, Paragraph, Spacer
from reportlab.lib.styles import getSampleStyleSheet
from reportlab.lib.units import mm


def matrix_table_data(labels: list, rows: list) -> list:
    """Header row ["", label1, ...] followed by one row per point; cells are exact value strings."""
    table_data = [[""] + list(labels)]
    for label, cells in zip(labels, rows):
        cells = list(cells)
        if len(cells) < len(labels):
            cells = cells + [""] * (len(labels) - len(cells))
        table_data.append([label] + [str(c) for c in cells])
    return table_data


def export_matrix_pdf(filename: str, labels: list, rows: list, meta: dict):
    """
    filename: output path
    labels: point labels in matrix order
    rows: list of rows of value strings
    meta: dict with optional keys: title, range_set, notes (list of strings)
    """
    meta = meta or {}
    title = meta.get("title", "Distance matrix")

    doc = SimpleDocTemplate(filename, pagesize=landscape(A4), rightMargin=12*mm, leftMargin=12*mm, topMargin=12*mm, bottomMargin=12*mm)
    styles = getSampleStyleSheet()
    story = []

    story.append(Paragraph(title, styles["Title"]))
    if meta.get("range_set"):
        story.append(Paragraph(f"Range set: {meta['range_set']}", styles["Normal"]))
    for note in meta.get("notes", []):
        story.append(Paragraph(note, styles["Normal"]))
    story.append(Spacer(1, 6))

    tbl = Table(matrix_table_data(labels, rows), repeatRows=1)
    style = TableStyle([
        ("BACKGROUND", (0,0), (-1,0), colors.HexColor("#f3f4f6")),
        ("BACKGROUND", (0,0), (0,-1), colors.HexColor("#f3f4f6")),
        ("GRID", (0,0), (-1,-1), 0.5, colors.grey),
        ("ALIGN", (0,0), (-1,-1), "CENTER"),
        ("FONTNAME", (0,0), (-1,0), "Helvetica-Bold"),
        ("FONTNAME", (0,0), (0,-1), "Helvetica-Bold"),
        ("VALIGN", (0,0), (-1,-1), "MIDDLE"),
        ("FONTSIZE", (0,0), (-1,-1), 8 if len(labels) > 12 else 10),
    ])
    tbl.setStyle(style)
    story.append(tbl)

    doc.build(story)
