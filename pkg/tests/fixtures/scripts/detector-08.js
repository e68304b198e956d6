setTimeout(function () {
  var bait = document.getElementById("sponsor");
  if (!bait || bait.clientHeight === 1) {
    var overlay = document.createElement("div");
    overlay.textContent = "blocker detected";
    document.body.appendChild(overlay);
  }
}, 3000);
