setTimeout(function () {
  var check = document.getElementById("skyscraper");
  if (!check || check.clientHeight === 0) {
    var panel = document.createElement("div");
    panel.textContent = "your adblock hides our ads";
    document.body.appendChild(panel);
  }
}, 2222);
