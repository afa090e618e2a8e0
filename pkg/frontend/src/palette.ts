/** The six-emoji reaction palette shown on long-press. */

import { EMOJI_PALETTE } from "./types.js";

export function showPalette(
  doc: Document,
  anchor: HTMLElement,
  onSelect: (emoji: string) => void,
): HTMLElement {
  hidePalette(doc);
  const palette = doc.createElement("div");
  palette.className = "palette";
  palette.dataset.role = "palette";
  for (const emoji of EMOJI_PALETTE) {
    const btn = doc.createElement("button");
    btn.className = "palette-emoji";
    btn.textContent = emoji;
    btn.addEventListener("click", () => {
      hidePalette(doc);
      onSelect(emoji);
    });
    palette.appendChild(btn);
  }
  anchor.appendChild(palette);
  return palette;
}

export function hidePalette(doc: Document): void {
  doc.querySelectorAll('[data-role="palette"]').forEach((el) => el.remove());
}
