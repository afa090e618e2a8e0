/** Long-press detection (mouse and touch): press held >= 500 ms. */

export const LONG_PRESS_MS = 500;

export function attachLongPress(
  el: HTMLElement,
  onLongPress: (target: HTMLElement) => void,
  holdMs: number = LONG_PRESS_MS,
  setTimeoutFn: typeof setTimeout = setTimeout,
  clearTimeoutFn: typeof clearTimeout = clearTimeout,
): void {
  let timer: ReturnType<typeof setTimeout> | null = null;

  const begin = () => {
    cancel();
    timer = setTimeoutFn(() => {
      timer = null;
      onLongPress(el);
    }, holdMs);
  };
  const cancel = () => {
    if (timer !== null) {
      clearTimeoutFn(timer);
      timer = null;
    }
  };

  el.addEventListener("mousedown", begin);
  el.addEventListener("touchstart", begin);
  for (const ev of ["mouseup", "mouseleave", "touchend", "touchcancel"]) {
    el.addEventListener(ev, cancel);
  }
}
