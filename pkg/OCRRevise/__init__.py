from OCRRevise import OCRRevise
